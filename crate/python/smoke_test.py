"""Smoke test for the ffwd_py extension module.

Uses an installed ``ffwd_py`` if one is importable; otherwise loads the
library built by ``cargo build -p ffwd-python --release --features extension-module``.
"""

import importlib.util
import json
import math
import pathlib
import sys


def load():
    try:
        import ffwd_py

        return ffwd_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        lib = root / "target" / profile / "libffwd_py.so"
        if lib.exists():
            spec = importlib.util.spec_from_file_location("ffwd_py", lib)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("ffwd_py not found; build it with cargo first")


def main():
    ffwd = load()

    c = ffwd.Circuit(2, 2)
    c.h(0)
    c.cnot(0, 1)
    c.measure(0, 0)
    c.measure(1, 1)
    d = ffwd.run_exact(c)
    probs = d.probabilities()
    assert math.isclose(probs["00"], 0.5) and math.isclose(probs["11"], 0.5), probs
    assert json.loads(d.to_json())["schema_version"] == ffwd.SCHEMA_VERSION
    assert ffwd.Circuit.from_text(c.to_text()).to_json() == c.to_json()

    sampled = ffwd.run_trajectories(c, 4000, seed=3)
    assert sampled.shots == 4000
    assert sampled.tvd(d) < 0.05

    device = ffwd.Device.packaged()
    assert device.num_qubits == 8
    for n in range(2, 5):
        ghz = ffwd.Protocol.ghz(n, device)
        assert ghz.depth() == 5
        assert abs(ghz.min_branch_fidelity() - 1.0) < 1e-9
        assert ghz.uncorrected_min_fidelity() < 0.99

    cnot = ffwd.Protocol.tele_cnot("adaptive", device)
    circuit, bits = cnot.with_basis_input(1).measured()
    out = ffwd.run_exact(circuit, bits=bits)
    assert math.isclose(out.probability("11"), 1.0, abs_tol=1e-9)
    noisy = ffwd.run_exact(circuit, device, bits=bits)
    assert 0.5 < noisy.probability("11") < 1.0

    value, genuine = ffwd.ghz_fidelity(0.5, 0.5, 1.0)
    assert math.isclose(value, 1.0) and genuine

    report = json.loads(ffwd.reproduce(device, include_cb=False))
    rows = {r["metric"]: r for r in report["rows"]}
    assert math.isclose(rows["ghz2_fidelity"]["noiseless"], 1.0, abs_tol=1e-6)
    print("ghz2 fidelity", round(rows["ghz2_fidelity"]["simulated"], 3))
    print("python smoke test passed")


if __name__ == "__main__":
    main()
