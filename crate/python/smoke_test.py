"""Smoke test for the witnessforge Python extension.

Build and install first:
    pip install maturin
    pip install --no-build-isolation -e crates/python
"""

import math
import sys

import witnessforge_py as wf


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def finite():
    fam = wf.DepolarizedFamily.maximally_entangled(3, 0.3)
    close(fam.analytic_min_eig(), -0.3 / 3 + 0.7 / 9, 1e-15)
    close(fam.detection_threshold(), 0.25, 1e-12)
    w = fam.witness()
    assert w.rank() == 4
    close(w.evaluate(fam.density()), fam.analytic_min_eig(), 1e-12)

    report = fam.report()
    assert report["entangled"] and not report["boundary"]
    assert len(report["quorum"]["terms"]) == 4

    s = 1 / math.sqrt(2)
    psi = [[s, 0], [0, 1j * s]]
    close(wf.DepolarizedFamily(psi, 0.5).detection_threshold(), 1 / 3, 1e-12)

    try:
        wf.DepolarizedFamily.maximally_entangled(3, 1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("p outside [0, 1] accepted")


def continuous():
    rho = wf.phase_noisy_twb(0.5, 1.0)
    close(wf.cv_witness_value(rho), wf.expect_witness_phase(0.5, 1.0), 1e-12)
    close(wf.expect_witness_phase(0.5, 0.0), -0.375, 1e-12)

    th = wf.gauss_threshold(0.5)
    close(th["kappa_numeric"], th["kappa_ppt"], 1e-5)
    assert wf.expect_witness_gauss(0.5, 0.2) < 0 < wf.expect_witness_gauss(0.5, 0.5)

    bs = wf.bs_squeezing(0.5, 0.0)
    close(bs["variance"], 1 / 12, 1e-6)


def tomography():
    rho = wf.twb_state(0.5)
    batch = wf.sample_homodyne(rho, 20000, seed=5)
    again = wf.sample_homodyne(rho, 20000, seed=5, workers=2)
    assert len(batch) == 20000 and batch.samples() == again.samples()
    mean, err = batch.estimate()
    assert abs(mean - wf.cv_witness_value(rho)) <= 4 * err, (mean, err)
    close(wf.kernel_w(0.0, 0.0, 0.0, 0.0), -8.0, 1e-12)


def main():
    for check in (finite, continuous, tomography):
        check()
        print(f"ok  {check.__name__}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
