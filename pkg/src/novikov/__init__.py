"""Exact kernel for Novikov series: descent data, isocrystals, and effectivity solvers."""

from .coeff import (
    DualNumbers,
    PrimeField,
    RationalField,
    RingElement,
    canonical_lift,
    reduce_mod_nilradical,
    roots_in_field,
)
from .descent import (
    CheckResult,
    DescentDatum,
    Trivialization,
    check_cocycle,
    check_hom_descent,
    coboundary_datum,
    isocrystal_from_descent,
    trivial_datum,
)
from .isocrystal import (
    Filtration,
    Isocrystal,
    NotEffective,
    ObstructedOrbit,
    SlopeNotOne,
    apply_semilinear,
    dm_filtration,
    find_eigenvector,
    trivialize_isocrystal_field,
    trivialize_unipotent_lattice,
)
from .pipeline import (
    check_exponent_restriction,
    descend,
    lift_trivialization_square_zero,
    normalize_trivialization,
    verify_effectivity,
)
from .series import (
    INF,
    MONOID_Q,
    MONOID_Z,
    Monoid,
    NovikovSeries,
    PI1,
    PI12,
    PI13,
    PI2,
    PI23,
    RHO1,
    RHO2,
    RHO3,
    Unsolvable,
    VarMap,
    constant_series,
    frobenius,
    invert_series,
    make_series,
    monoid_zp,
    monomial,
    one_series,
    rename_vars,
    slice_coefficient,
    solve_additive_twist,
    support_in_monoid,
    valuation_and_support,
    zero_series,
)
from .seriesalg import (
    SeriesMatrix,
    mat_det,
    mat_frobenius,
    mat_invert,
    mat_rename,
    mat_vec,
    minimal_dependence,
    solve_linear,
)

__version__ = "0.1.0"
