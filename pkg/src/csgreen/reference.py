"""Published reference eigenvalues used by the regression harness.

Lowest 20 levels (l = 0) of two confining Hamiltonians with charge -1,
as published to 12-13 significant digits:

* ``cornell``: D = 3, v(r) = -1/r + r
* ``coulomb_quadratic``: D = 2, v(r) = -1/r + r**2 / 2
"""
from .basis import BasisSpec, PotentialSpec

CORNELL = (
    0.577921351961, 2.450162895052, 3.756905691262, 4.855671243373, 5.836029886654,
    6.736620996511, 7.578378030294, 8.374205689360, 9.132754730978, 9.860176266906,
    10.56103960914, 11.23885563715, 11.89639544211, 12.53589461658, 13.15918982353,
    13.76781330561, 14.36306021727, 14.94603779901, 15.51770206715, 16.07888570444,
)

COULOMB_QUADRATIC = (
    -1.836207439051, 1.576895542024, 3.828388290161, 5.963137645126, 8.052626115348,
    10.11839697526, 12.16972896261, 14.21142722055, 16.24628453060, 18.27605894134,
    20.30192413905, 22.32469992791, 24.34497987508, 26.36320650647, 28.37971786276,
    30.39477752867, 32.40859467947, 34.42133786062, 36.43314470188, 38.44412891767,
)

# relative tolerance: below the printed precision, above its last-digit rounding
TABLE1_RTOL = 1e-8

TABLE1 = {
    "cornell": (BasisSpec(3, 0, 1.0), PotentialSpec({-1: -1.0, 1: 1.0}), (0.0, 16.5), CORNELL),
    "coulomb_quadratic": (BasisSpec(2, 0, 1.0), PotentialSpec({-1: -1.0, 2: 0.5}), (-3.0, 39.0), COULOMB_QUADRATIC),
}
