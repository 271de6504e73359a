#!/usr/bin/env python3
"""Smoke test for the cknlab extension module.

Builds nothing itself: run `cargo build --release -p ckn-py` first, then
`python3 python/smoke_test.py`. The script copies the compiled cdylib next
to a temp directory under the importable name and exercises the bound API
against closed-form expectations.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / "release" / "libcknlab.so",
        REPO / "target" / "debug" / "libcknlab.so",
        REPO / "target" / "release" / "libcknlab.dylib",
        REPO / "target" / "debug" / "libcknlab.dylib",
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        sys.exit("no compiled extension found; run `cargo build --release -p ckn-py` first")
    stage = Path(tempfile.mkdtemp(prefix="cknlab-"))
    shutil.copy2(built, stage / "cknlab.so")
    sys.path.insert(0, str(stage))
    import cknlab

    return cknlab


def approx(a, b, rel=1e-9, label=""):
    assert abs(a - b) <= rel * max(abs(b), 1e-300), f"{label}: {a} vs {b}"


def main():
    ckn = load_module()

    # Parameters and the derived exponent 1/r = (1-t)/s + t(n-p)/(np).
    params = ckn.Params(3, 2.0, 2.0, 0.5, 1.0)
    approx(params.r, 3.0, 1e-12, "derived r")
    approx(params.sobolev_exponent, 6.0, 1e-12, "sobolev exponent")
    try:
        ckn.Params(3, 2.0, 2.0, 0.5, -1.5)
        sys.exit("alpha <= -1 must be rejected")
    except ValueError:
        pass

    # Map, inverse, eigenvalues, determinant at a concrete point.
    x = [0.3, -1.2, 0.4]
    a = 0.7
    y = ckn.phi_map(x, a)
    back = ckn.inverse_phi(y, a)
    for xi, bi in zip(x, back):
        approx(bi, xi, 1e-12, "roundtrip")
    r = math.sqrt(sum(v * v for v in x))
    lam_r, lam_t, det = ckn.eigen(x, a)
    approx(lam_r, (1 + a) * r**a, 1e-13, "radial eigenvalue")
    approx(lam_t, r**a, 1e-13, "tangential eigenvalue")
    approx(det, (1 + a) * r ** (a * 3), 1e-13, "jacobian")
    assert abs(ckn.char_poly_residual(x, a, 0.8 * lam_r)) < 1e-12

    # Radial fields: F(f) = (1+alpha)^(-p) exactly.
    grid3 = ckn.Grid.product(20.0, 32, 6, 24, 12)
    f = ckn.Field.radial("gaussian", 1.0, 1.0)
    approx(ckn.ratio_f(f, params, grid3), (1 + params.alpha) ** -2.0, 1e-10, "radial F")

    # Change of variables: composed norms shrink by exactly (1+a)^(-1/q),
    # provided the composed grid truncates at r_max^(1/(1+a)).
    radial_grid = ckn.Grid.radial(20.0, 128, 8, 3)
    composed_grid = ckn.Grid.graded(20.0 ** (1 / (1 + a)), 256, 8, 2.0, 3)
    g = f.compose(a)
    assert g.is_radial
    for q in (2.0, 3.0):
        lhs = ckn.weighted_norm(g, q, a * 3, composed_grid) ** q * (1 + a)
        rhs = ckn.weighted_norm(f, q, 0.0, radial_grid) ** q
        approx(lhs, rhs, 1e-8, f"value norm q={q}")

    # Quotient identity for radial profiles.
    pa = ckn.Params(3, 2.0, 2.0, 0.5, a)
    q0 = ckn.ckn_quotient(f, ckn.Params(3, 2.0, 2.0, 0.5, 0.0), radial_grid)["quotient"]
    qa = ckn.ckn_quotient(g, pa, composed_grid)["quotient"]
    approx(qa, (1 + a) ** (0.5 / 3 - 0.5) * q0, 1e-8, "radial quotient identity")

    # Interpolation chain at alpha = 0.
    lhs, rhs, holds = ckn.interpolation_check(
        f, ckn.Params(3, 2.0, 2.0, 0.5, 0.0), radial_grid
    )
    assert holds and lhs <= rhs

    # Constant assembly around the estimated M.
    est = ckn.estimate_m(ckn.Params(3, 2.0, 2.0, 0.5, 0.0), radial_grid)
    assert est["converged"], est
    approx(est["value"], 0.5590359067, 1e-4, "M estimate")
    sharp = ckn.sharp_constant(pa, est["value"])
    radial_const = ckn.radial_sharp_constant(pa, est["value"])
    approx(sharp / radial_const, (1 + a) ** 0.5, 1e-12, "gap ratio")
    approx(ckn.a_alpha(-0.5, 0.5), math.sqrt(2.0), 1e-12, "a_alpha")

    # Symmetry scan: F identically 1 at alpha = 0, increasing toward 1 at
    # alpha = 1.
    scan_grid = ckn.Grid.product(5.0, 32, 6, 40, 16)
    flat = ckn.symmetry_scan(0.0, 2.0, [1, 2, 4], scan_grid)
    for v in flat["f_values"]:
        approx(v, 1.0, 1e-12, "flat scan")
    rising = ckn.symmetry_scan(1.0, 2.0, [1, 2, 4, 8], scan_grid)
    vals = rising["f_values"]
    assert all(b > a for a, b in zip(vals, vals[1:])), vals
    assert 0.25 <= vals[0] < vals[-1] < 1.0

    bump = ckn.Field.bump()
    assert bump.is_radial and bump.value([2.0, 0.0, 0.0]) > 0.0
    fk = ckn.Field.fk(4)
    assert not fk.is_radial

    print("smoke test passed")


if __name__ == "__main__":
    main()
