"""Command-line front end.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage error or size
guard, 3 witness retries or pool exhausted.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import certificate
from .algebra import Instance, RealSet, format_scalar, parse_scalar
from .families import FAMILIES, make_instance
from .oracle import GuardError, anticoncentration_estimate, spectrum_bruteforce
from .parallel import ordered_map
from .pools import pool_construct, rect_area_count, two_area_set
from .sumsets import additive_energy, subset_sum_count, supportive_halasz_lower_bound
from .witness import RunConfig, WitnessError, run_witness, verify_certificate

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_RETRY = 0, 1, 2, 3

SCALE_COLUMNS = (
    "n", "rect_areas", "pool_size", "pool_bound", "m", "energy2", "sigma_d_size", "halasz_bound",
    "sigma_over_n3", "checks_passed",
)


def _bail(code: int, msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _parse_list(text: str) -> list[Fraction]:
    try:
        return [parse_scalar(x) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError) as e:
        raise click.BadParameter(f"cannot parse {text!r} as rationals") from e


def _parse_range(text: str) -> list[int]:
    """'2..8' or '32,64,128'."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise click.BadParameter(f"bad range {text!r}; use 'lo..hi' or a comma list") from e


def instance_options(fn):
    opts = [
        click.option("--family", type=click.Choice(FAMILIES), default=None, help="Builtin family (default interval when --n is given)."),
        click.option("--n", "n", type=int, default=None, help="Instance size for --family."),
        click.option("--family-seed", type=int, default=0, show_default=True, help="Seed of the random family."),
        click.option("--a", "a_text", default=None, help="Inline A, e.g. '1,2,3/2'."),
        click.option("--b", "b_text", default=None, help="Inline B."),
        click.option("--file", "in_file", type=click.Path(exists=True, dir_okay=False), default=None, help='JSON {"a": [...], "b": [...]}.'),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def resolve_instance(family, n, family_seed, a_text, b_text, in_file) -> Instance:
    inline = a_text is not None or b_text is not None
    sources = sum([inline, in_file is not None, family is not None or n is not None])
    if sources != 1:
        _bail(EXIT_USAGE, "give exactly one instance source: --a/--b, --file, or --family/--n")
    try:
        if inline:
            if a_text is None or b_text is None:
                _bail(EXIT_USAGE, "--a and --b go together")
            return Instance(RealSet.of(_parse_list(a_text)), RealSet.of(_parse_list(b_text)))
        if in_file is not None:
            doc = json.loads(Path(in_file).read_text())
            return Instance(RealSet.of(map(str, doc["a"])), RealSet.of(map(str, doc["b"])))
        if n is None:
            _bail(EXIT_USAGE, "--family needs --n")
        return make_instance(family or "interval", n, family_seed)
    except (ValueError, KeyError, TypeError) as e:
        _bail(EXIT_USAGE, f"bad instance: {e}")


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


output_option = click.option("--out", default=None, type=click.Path(dir_okay=False), help="Write here instead of stdout.")


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose: bool):
    """Exact experiments on permutation dot products sum_i a_i b_pi(i).

    All rationals are read and written exactly ("p/q" or decimal strings on
    input, "p/q" on output). PERMDOT_THREADS caps the worker count (0 = auto).
    """
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@instance_options
@click.option("--range", "n_range", default=None, help="Sweep n over 'lo..hi' for the family; emits CSV n,size,min,max.")
@click.option("--values/--no-values", default=True, help="Include the full value list (JSON mode).")
@output_option
def spectrum(family, n, family_seed, a_text, b_text, in_file, n_range, values, out):
    """Exact Sigma(A,B) by enumerating all of S_n (n <= 11)."""
    try:
        if n_range:
            rows = []
            for k in _parse_range(n_range):
                res = spectrum_bruteforce(make_instance(family or "interval", k, family_seed), keep_values=False)
                rows.append([k, res.size, format_scalar(res.min), format_scalar(res.max)])
            _emit(_csv(rows, ["n", "size", "min", "max"]), out)
            return
        inst = resolve_instance(family, n, family_seed, a_text, b_text, in_file)
        res = spectrum_bruteforce(inst, keep_values=values)
    except GuardError as e:
        _bail(EXIT_USAGE, str(e))
    doc = {"n": inst.n, "size": res.size, "min": format_scalar(res.min), "max": format_scalar(res.max)}
    if values:
        doc["values"] = [format_scalar(v) for v in res.values]
    _emit(_json(doc), out)


def run_options(fn):
    opts = [
        click.option("--seed", type=int, default=0, show_default=True, help="Run seed (retries use seed+1, seed+2, ...)."),
        click.option("--mode", type=click.Choice(["cubic", "lossy"]), default="cubic", show_default=True),
        click.option("--c0", default="1/4", show_default=True, help="Lossy pool constant in R = c0 n^2 / ln n."),
        click.option("--lossy-c", default="1/4", show_default=True, help="Lossy m = floor(c sqrt(R))."),
        click.option("--slack", default="16", show_default=True, help="Accept when E2(D) <= slack * m^2."),
        click.option("--max-retries", type=int, default=10, show_default=True),
        click.option("--m", "m_override", type=int, default=None, help="Force the number of switches."),
        click.option("--samples", type=int, default=10**4, show_default=True, help="Random subsets checked in verification."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _config(inst, seed, mode, c0, lossy_c, slack, max_retries, m_override, samples) -> RunConfig:
    try:
        return RunConfig(
            n=inst.n, seed=seed, mode=mode, c0=parse_scalar(c0), lossy_c=parse_scalar(lossy_c),
            energy_slack=parse_scalar(slack), max_retries=max_retries, m_override=m_override,
            verify_samples=samples,
        )
    except (ValueError, ZeroDivisionError) as e:
        _bail(EXIT_USAGE, str(e))


@main.command()
@instance_options
@run_options
@output_option
def witness(family, n, family_seed, a_text, b_text, in_file, seed, mode, c0, lossy_c, slack, max_retries, m_override, samples, out):
    """Build and verify a Sigma(D) witness; writes the JSON certificate."""
    inst = resolve_instance(family, n, family_seed, a_text, b_text, in_file)
    config = _config(inst, seed, mode, c0, lossy_c, slack, max_retries, m_override, samples)
    try:
        cert = run_witness(inst, config)
    except WitnessError as e:
        _bail(EXIT_RETRY, str(e))
    except ValueError as e:
        _bail(EXIT_USAGE, str(e))
    _emit(certificate.dumps(cert), out)
    failed = [c for c in cert.checks if not c.passed]
    if failed:
        click.echo(f"FAIL {failed[0].name}: {failed[0].detail}", err=True)
        sys.exit(EXIT_CHECK)


@main.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--samples", type=int, default=None, help="Override the stored sample count.")
def verify(path, samples):
    """Re-run every certificate check; exit 0 iff all pass."""
    try:
        cert = certificate.load(path)
    except (OSError, certificate.CertificateFormatError) as e:
        _bail(EXIT_USAGE, f"cannot read certificate: {e}")
    checks = verify_certificate(cert.instance, cert, cert.config.verify_samples if samples is None else samples)
    for c in checks:
        if not c.passed:
            click.echo(f"FAIL {c.name}: {c.detail}")
            sys.exit(EXIT_CHECK)
    click.echo(f"OK {len(checks)} checks passed")


@main.command()
@click.option("--d", "d_text", required=True, help="Increment set, e.g. '1,2,5,11'.")
@click.option("--k", type=click.IntRange(1, 3), default=2, show_default=True)
@output_option
def energy(d_text, k, out):
    """E_k(D), |Sigma(D)| and the block lower bound for an increment set."""
    D = _parse_list(d_text)
    try:
        rep = additive_energy(D, k)
        sig = subset_sum_count(D)
        bound, dec = supportive_halasz_lower_bound(D, k)
    except ValueError as e:
        _bail(EXIT_USAGE, str(e))
    doc = {
        "m": len(D), "k": k, "energy": rep.energy, "sigma_size": sig, "block_bound": bound,
        "energy_bound": format_scalar(dec.energy_bound), "negated": dec.negated,
        "blocks": [{"t": b.t, "offset": format_scalar(b.offset), "size": b.size} for b in dec.blocks],
    }
    _emit(_json(doc), out)
    if bound > sig:
        sys.exit(EXIT_CHECK)


@main.command()
@instance_options
@click.option("--list", "list_values", is_flag=True, help="Include every value with its representation.")
@output_option
def pool(family, n, family_seed, a_text, b_text, in_file, list_values, out):
    """The disjoint-index two-area pool U(A,B)."""
    inst = resolve_instance(family, n, family_seed, a_text, b_text, in_file)
    try:
        U = pool_construct(inst.a, inst.b)
    except ValueError as e:
        _bail(EXIT_USAGE, str(e))
    bad = [u for u, r in U.representations.items() if not r.is_valid(inst.a, inst.b)]
    doc = {
        "n": len(inst.a), "m": len(inst.b), "size": len(U), "size_bound": U.plan.size_bound,
        "delta": format_scalar(U.delta), "diameter": format_scalar(U.diameter),
        "s": U.plan.s, "anchor": U.plan.anchor, "representations_valid": not bad,
    }
    if list_values:
        doc["values"] = [
            {"value": format_scalar(u), "a_indices": list(r.a_indices), "b_indices": list(r.b_indices)}
            for u, r in sorted(U.representations.items())
        ]
    _emit(_json(doc), out)
    if bad or len(U) < U.plan.size_bound:
        sys.exit(EXIT_CHECK)


@main.command()
@instance_options
@click.option("--two-area/--no-two-area", default=False, help="Also enumerate (A-A)(B-B)+(A-A)(B-B).")
@output_option
def areas(family, n, family_seed, a_text, b_text, in_file, two_area, out):
    """Size of the rectangular-area set (A-A)(B-B)."""
    inst = resolve_instance(family, n, family_seed, a_text, b_text, in_file)
    doc = {"n": inst.n, "rect_areas": rect_area_count(inst.a, inst.b)}
    if two_area:
        try:
            doc["two_area"] = len(two_area_set(inst.a, inst.b))
        except ValueError as e:
            _bail(EXIT_USAGE, str(e))
    _emit(_json(doc), out)


@main.command()
@instance_options
@click.option("--samples", type=int, default=10**6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@output_option
def anticonc(family, n, family_seed, a_text, b_text, in_file, samples, seed, out):
    """Largest atom of S(pi) for uniform pi (exact for n <= 9)."""
    inst = resolve_instance(family, n, family_seed, a_text, b_text, in_file)
    try:
        est = anticoncentration_estimate(inst, samples, seed)
    except ValueError as e:
        _bail(EXIT_USAGE, str(e))
    _emit(_json({
        "n": inst.n, "exact": est.exact, "samples": est.samples, "max_atom_frequency": est.max_atom_frequency,
        "estimate": format_scalar(est.estimate), "argmax": format_scalar(est.argmax),
    }), out)


def scale_row(inst: Instance, config: RunConfig) -> list:
    """One CSV row; stages that hit a guard leave their cells empty."""
    n = inst.n
    row = {c: "" for c in SCALE_COLUMNS}
    row["n"] = n
    row["rect_areas"] = rect_area_count(inst.a, inst.b)
    try:
        U = pool_construct(inst.a, inst.b)
        row["pool_size"], row["pool_bound"] = len(U), U.plan.size_bound
    except ValueError:
        pass
    try:
        cert = run_witness(inst, config)
    except (ValueError, WitnessError):
        return [row[c] for c in SCALE_COLUMNS]
    row.update(
        m=cert.m, energy2=cert.energy2, sigma_d_size=cert.sigma_d_size, halasz_bound=cert.halasz_bound,
        sigma_over_n3=format_scalar(Fraction(cert.sigma_d_size, n**3)), checks_passed=cert.passed,
    )
    return [row[c] for c in SCALE_COLUMNS]


@main.command()
@click.option("--family", type=click.Choice(FAMILIES), default="interval", show_default=True)
@click.option("--family-seed", type=int, default=0, show_default=True)
@click.option("--ns", "ns_text", required=True, help="Sizes: 'lo..hi' or '32,64,128'.")
@run_options
@output_option
def scale(family, family_seed, ns_text, seed, mode, c0, lossy_c, slack, max_retries, m_override, samples, out):
    """Scaling sweep; CSV columns: n, rect_areas = |(A-A)(B-B)|, pool_size = |U(A,B)|,
    pool_bound = (n-3)(ceil(n/2)-2), m, energy2 = E2(D), sigma_d_size = |Sigma(D)|,
    halasz_bound, sigma_over_n3 (p/q), checks_passed. Empty cells mark guarded stages."""
    ns = _parse_range(ns_text)
    jobs = []
    for k in ns:
        inst = make_instance(family, k, family_seed)
        jobs.append((inst, _config(inst, seed, mode, c0, lossy_c, slack, max_retries, m_override, samples)))
    rows = ordered_map(lambda job: scale_row(*job), jobs)
    _emit(_csv(rows, SCALE_COLUMNS), out)
    if any(r[-1] is False for r in rows):
        sys.exit(EXIT_CHECK)


if __name__ == "__main__":
    main()
