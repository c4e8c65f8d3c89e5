"""JSON form of a witness certificate.

Every rational is written as an exact "p/q" string; there are no floats in
the document. Fields::

    version, mode, n, seed, seed_used, attempts, c0, lossy_c, energy_slack,
    m_override, verify_samples, m, a, b, switches, pi0, energy2,
    sigma_d_size, halasz_bound, halasz_k, ratios, checks

``switches`` holds ``{a_indices, b_indices, increment}`` with 1-based
indices; a switch's increment is the sum over consecutive index pairs of
(a_x0 - a_x1)(b_y0 - b_y1). ``checks`` holds ``{name, pass, detail}``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .algebra import Instance, RealSet, format_scalar, parse_scalar
from .witness import Check, PairedSwitch, RunConfig, WitnessCertificate

VERSION = 1


class CertificateFormatError(ValueError):
    pass


def to_dict(cert: WitnessCertificate) -> dict:
    cfg = cert.config
    return {
        "version": VERSION,
        "mode": cfg.mode,
        "n": cert.instance.n,
        "seed": cfg.seed,
        "seed_used": cert.seed_used,
        "attempts": cert.attempts,
        "c0": format_scalar(cfg.c0),
        "lossy_c": format_scalar(cfg.lossy_c),
        "energy_slack": format_scalar(cfg.energy_slack),
        "m_override": cfg.m_override,
        "verify_samples": cfg.verify_samples,
        "m": cert.m,
        "a": [format_scalar(x) for x in cert.instance.a],
        "b": [format_scalar(x) for x in cert.instance.b],
        "switches": [
            {"a_indices": list(s.a_indices), "b_indices": list(s.b_indices), "increment": format_scalar(s.increment)}
            for s in cert.switches
        ],
        "pi0": list(cert.pi0),
        "energy2": cert.energy2,
        "sigma_d_size": cert.sigma_d_size,
        "halasz_bound": cert.halasz_bound,
        "halasz_k": cert.halasz_k,
        "ratios": {k: format_scalar(v) for k, v in cert.ratios().items()},
        "checks": [{"name": c.name, "pass": c.passed, "detail": c.detail} for c in cert.checks],
    }


def dumps(cert: WitnessCertificate) -> str:
    return json.dumps(to_dict(cert), indent=2) + "\n"


def _need(doc: dict, key: str, kind):
    if key not in doc:
        raise CertificateFormatError(f"missing field {key!r}")
    val = doc[key]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise CertificateFormatError(f"field {key!r} must be an integer")
    if kind is not int and not isinstance(val, kind):
        raise CertificateFormatError(f"field {key!r} must be {kind.__name__}")
    return val


def _rational(s) -> Fraction:
    if not isinstance(s, str):
        raise CertificateFormatError(f"rationals must be 'p/q' strings, got {s!r}")
    try:
        return parse_scalar(s)
    except (ValueError, ZeroDivisionError) as e:
        raise CertificateFormatError(f"bad rational {s!r}") from e


def _int_list(doc: dict, key: str) -> tuple[int, ...]:
    vals = _need(doc, key, list)
    if not all(isinstance(x, int) and not isinstance(x, bool) for x in vals):
        raise CertificateFormatError(f"field {key!r} must be a list of integers")
    return tuple(vals)


def from_dict(doc) -> WitnessCertificate:
    """Parse a certificate. Only the format is validated here; ``verify_certificate`` checks the content."""
    if not isinstance(doc, dict):
        raise CertificateFormatError("certificate must be a JSON object")
    if _need(doc, "version", int) != VERSION:
        raise CertificateFormatError(f"unsupported version {doc['version']}")
    try:
        inst = Instance(
            RealSet(tuple(_rational(x) for x in _need(doc, "a", list))),
            RealSet(tuple(_rational(x) for x in _need(doc, "b", list))),
        )
        m_override = doc.get("m_override")
        config = RunConfig(
            n=_need(doc, "n", int),
            seed=_need(doc, "seed", int),
            mode=_need(doc, "mode", str),
            c0=_rational(_need(doc, "c0", str)),
            lossy_c=_rational(doc.get("lossy_c", "1/4")),
            energy_slack=_rational(_need(doc, "energy_slack", str)),
            m_override=m_override,
            verify_samples=doc.get("verify_samples", 10**4),
        )
        switches = []
        for sw in _need(doc, "switches", list):
            if not isinstance(sw, dict):
                raise CertificateFormatError("switch entries must be objects")
            switches.append(PairedSwitch(_int_list(sw, "a_indices"), _int_list(sw, "b_indices"), _rational(_need(sw, "increment", str))))
    except CertificateFormatError:
        raise
    except (ValueError, TypeError) as e:
        raise CertificateFormatError(str(e)) from e
    if config.n != inst.n:
        raise CertificateFormatError(f"n = {config.n} but a/b have length {inst.n}")
    if _need(doc, "m", int) != len(switches):
        raise CertificateFormatError("m does not match the number of switches")
    checks = []
    for c in doc.get("checks", []):
        if not isinstance(c, dict):
            raise CertificateFormatError("check entries must be objects")
        checks.append(Check(str(c.get("name", "")), bool(c.get("pass")), str(c.get("detail", ""))))
    return WitnessCertificate(
        config=config,
        instance=inst,
        seed_used=_need(doc, "seed_used", int),
        attempts=_need(doc, "attempts", int),
        switches=tuple(switches),
        pi0=_int_list(doc, "pi0"),
        energy2=_need(doc, "energy2", int),
        sigma_d_size=_need(doc, "sigma_d_size", int),
        halasz_bound=_need(doc, "halasz_bound", int),
        halasz_k=_need(doc, "halasz_k", int),
        checks=tuple(checks),
    )


def loads(text: str) -> WitnessCertificate:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CertificateFormatError(f"not valid JSON: {e}") from e
    return from_dict(doc)


def load(path: str | Path) -> WitnessCertificate:
    return loads(Path(path).read_text())


def dump(cert: WitnessCertificate, path: str | Path) -> None:
    Path(path).write_text(dumps(cert))
