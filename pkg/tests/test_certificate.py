import json
from dataclasses import replace

import pytest

from permdot import certificate
from permdot.algebra import Instance
from permdot.families import make_instance
from permdot.witness import RunConfig, run_witness, verify_certificate


@pytest.fixture(scope="module")
def cert():
    inst = make_instance("random", 64, 2)
    return run_witness(inst, RunConfig(n=64, seed=3, verify_samples=200))


def test_roundtrip(cert):
    back = certificate.loads(certificate.dumps(cert))
    assert back == cert
    assert certificate.dumps(back) == certificate.dumps(cert)


def test_file_roundtrip(cert, tmp_path):
    p = tmp_path / "c.json"
    certificate.dump(cert, p)
    assert certificate.load(p) == cert


def test_no_floats(cert):
    def walk(x):
        if isinstance(x, float):
            raise AssertionError(f"float {x}")
        if isinstance(x, dict):
            for v in x.values():
                walk(v)
        if isinstance(x, list):
            for v in x:
                walk(v)

    doc = json.loads(certificate.dumps(cert))
    walk(doc)
    assert all("/" in s for s in doc["a"] + doc["b"])
    assert {"version", "mode", "n", "seed", "c0", "m", "a", "b", "switches", "pi0", "energy2",
            "sigma_d_size", "halasz_bound", "checks"} <= set(doc)
    assert set(doc["checks"][0]) == {"name", "pass", "detail"}


def test_lossy_roundtrip():
    inst = Instance.interval(64)
    cert = run_witness(inst, RunConfig(n=64, seed=1, mode="lossy", verify_samples=100))
    back = certificate.loads(certificate.dumps(cert))
    assert back == cert and back.passed
    assert verify_certificate(back.instance, back, 50) == verify_certificate(cert.instance, cert, 50)


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("pi0"),
    lambda d: d.update(version=99),
    lambda d: d.update(a=[1, 2]),
    lambda d: d.update(m=d["m"] + 1),
    lambda d: d.update(c0="1/0"),
    lambda d: d.update(n="64"),
    lambda d: d["switches"][0].update(a_indices=[1, 2, 3]),
    lambda d: d.update(pi0=["x"]),
])
def test_format_errors(cert, mutate):
    doc = json.loads(certificate.dumps(cert))
    mutate(doc)
    with pytest.raises(certificate.CertificateFormatError):
        certificate.loads(json.dumps(doc))


def test_truncated(cert):
    text = certificate.dumps(cert)
    with pytest.raises(certificate.CertificateFormatError):
        certificate.loads(text[: len(text) // 2])


def test_tampered_content_parses(cert):
    doc = json.loads(certificate.dumps(cert))
    doc["pi0"][0], doc["pi0"][-1] = doc["pi0"][-1], doc["pi0"][0]
    back = certificate.loads(json.dumps(doc))
    assert back.pi0 != cert.pi0
    checks = verify_certificate(back.instance, back, 100)
    assert not all(c.passed for c in checks)


def test_stored_checks_are_not_trusted(cert):
    # a certificate claiming failure is still re-verified from scratch
    doc = json.loads(certificate.dumps(cert))
    for c in doc["checks"]:
        c["pass"] = False
    back = certificate.loads(json.dumps(doc))
    assert not back.passed
    assert all(c.passed for c in verify_certificate(back.instance, replace(back, checks=()), 100))
