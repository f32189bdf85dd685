import pytest

from cartan.cmparams import Parity, PhiDelta, fundamental_discriminants, is_even_discriminant, phi_delta, validate_order
from cartan.entangle import (
    Tower,
    TowerSource,
    build_det_lift,
    check_diagram_commutes,
    degree_report,
    kernel_parametrized,
    kernel_report,
    least_n0,
    n0_search,
    reduction_kernel,
    verify_tower,
)
from cartan.errors import (
    ClosureBudgetExceeded,
    ElementNotInGroup,
    EmptyFiber,
    LiftNotWellDefined,
    MissingLevel,
    ModulusMismatch,
    TowerNotCompatible,
)
from cartan.matgroup import Mat2, in_sl2, mat_det
from cartan.modarith import Residue, embed_integer, unit_count

GAUSS = PhiDelta.raw(delta=-4, phi=0)
MINUS_SEVEN = PhiDelta.raw(delta=-2, phi=1)


def gauss_tower(n_top=7):
    return Tower.full_normalizer(2, GAUSS, n_top=n_top)


def matrices(*texts, m):
    return {Mat2.parse(text, m) for text in texts}


# kernels

def test_kernel_at_level_two_is_in_sl2():
    report = reduction_kernel(gauss_tower(3), 2)
    assert report.kernel_elements == matrices("1,0,0,1", "1,4,0,1", "5,0,0,5", "5,4,0,5", m=8)
    assert report.in_sl2
    assert report.witness is None and report.witness_det is None


def test_kernel_at_level_one_picks_up_gamma():
    report = reduction_kernel(gauss_tower(2), 1)
    assert report.size == 8
    assert not report.in_sl2
    assert report.witness == Mat2((3, 0, 0, 1), 4)
    assert report.witness_det == 3


def test_kernel_witness_odd_order():
    report = reduction_kernel(Tower.full_normalizer(2, MINUS_SEVEN, n_top=3), 2)
    assert not report.in_sl2
    assert report.witness == Mat2((5, 4, 0, 1), 8)
    assert report.witness_det == 5


def test_kernel_witness_odd_prime():
    report = reduction_kernel(Tower.full_normalizer(5, PhiDelta.raw(delta=2, phi=0), n_top=2), 1)
    assert report.size == 25
    assert report.witness == Mat2((6, 0, 0, 6), 25)
    assert report.witness_det == 11


def test_sorted_elements_are_row_major():
    report = reduction_kernel(gauss_tower(3), 2)
    assert [str(x) for x in report.sorted_elements()] == ["1,0,0,1", "1,4,0,1", "5,0,0,5", "5,4,0,5"]


def test_kernel_needs_both_levels():
    with pytest.raises(MissingLevel):
        reduction_kernel(gauss_tower(3), 3)


def test_kernel_parametrized_rejects_wrong_modulus():
    with pytest.raises(ModulusMismatch):
        kernel_parametrized(Residue(4, 4), Residue(0, 4), 2, 2)


ORACLE_GRID = [
    pytest.param(p, n, marks=pytest.mark.slow) if (p, n) == (5, 3) else (p, n)
    for p in (2, 3, 5)
    for n in (1, 2, 3)
]


@pytest.mark.parametrize("p, n", ORACLE_GRID)
def test_kernel_parametrized_matches_enumeration(p, n):
    m = p ** (n + 1)
    for delta in range(8):
        for phi in range(8):
            tower = Tower.full_normalizer(p, PhiDelta.raw(delta, phi), n_top=n + 1, n_min=n)
            brute = reduction_kernel(tower, n).kernel_elements
            assert kernel_parametrized(embed_integer(delta, m), embed_integer(phi, m), p, n) == brute


def test_kernel_report_falls_back_past_the_cap():
    tower = Tower.full_normalizer(5, PhiDelta.raw(delta=2, phi=0), n_top=2, cap=1000)
    assert not tower.within_budget(2)
    report = kernel_report(tower, 1)
    assert report.witness == Mat2((6, 0, 0, 6), 25)
    with pytest.raises(ClosureBudgetExceeded):
        reduction_kernel(tower, 1)


# the determinant lift

def test_lift_values():
    lift = build_det_lift(gauss_tower(3), 2)
    assert lift.well_defined and lift.surjective
    assert lift(Mat2((1, 2, 0, 1), 4)) == Residue(1, 8)
    assert lift(Mat2((3, 0, 0, 1), 4)) == Residue(7, 8)


def test_lift_rejects_outsiders():
    lift = build_det_lift(gauss_tower(3), 2)
    with pytest.raises(ElementNotInGroup):
        lift(Mat2((1, 1, 1, 1), 4))


def test_lift_not_well_defined_names_the_identity_fiber():
    lift = build_det_lift(Tower.full_normalizer(2, MINUS_SEVEN, n_top=3), 2)
    assert not lift.well_defined
    g1, g2 = lift.failure_witness
    assert (g1, g2) == (Mat2((1, 0, 0, 1), 8), Mat2((5, 4, 0, 1), 8))
    assert {mat_det(g1).value, mat_det(g2).value} == {1, 5}


@pytest.mark.parametrize("n", range(2, 7))
def test_lift_and_diagram_for_the_gaussian_tower(n):
    tower = gauss_tower(n + 1)
    lift = build_det_lift(tower, n)
    assert lift.well_defined
    assert lift.surjective
    assert check_diagram_commutes(tower, n, lift)


def test_diagram_fails_with_the_lift():
    tower = Tower.full_normalizer(2, MINUS_SEVEN, n_top=3)
    lift = build_det_lift(tower, 2)
    check = check_diagram_commutes(tower, 2, lift)
    assert not check
    assert check.counterexample is not None


def test_diagram_refuses_foreign_lift():
    tower = gauss_tower(4)
    with pytest.raises(ValueError):
        check_diagram_commutes(tower, 3, build_det_lift(tower, 2))


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("delta, phi", [(-4, 0), (-2, 1), (2, 0), (3, 1), (0, 2)])
@pytest.mark.parametrize("n", [1, 2])
def test_lift_well_defined_exactly_when_kernel_in_sl2(p, delta, phi, n):
    tower = Tower.full_normalizer(p, PhiDelta.raw(delta, phi), n_top=n + 1, n_min=n)
    kernel = reduction_kernel(tower, n)
    lift = build_det_lift(tower, n)
    assert lift.well_defined == kernel.in_sl2 == all(in_sl2(x) for x in kernel.kernel_elements)
    assert bool(check_diagram_commutes(tower, n, lift)) == lift.well_defined


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("delta, phi", [(-4, 0), (-2, 1), (2, 0), (3, 1), (0, 2)])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_lift_surjective_when_det_is(p, delta, phi, n):
    tower = Tower.full_normalizer(p, PhiDelta.raw(delta, phi), n_top=n + 1, n_min=n)
    lift = build_det_lift(tower, n)
    if not lift.well_defined:
        pytest.skip("lift depends on the preimage")
    m = tower.modulus(n + 1)
    det_image = {mat_det(Mat2(x, m)).value for x in tower.level(n + 1).elements}
    assert lift.image == det_image
    assert lift.surjective == (len(det_image) == unit_count(m))


# degree bookkeeping

@pytest.mark.parametrize("n, order, image, kernel", [(2, 16, 4, 4), (3, 64, 8, 8)])
def test_degree_report(n, order, image, kernel):
    tower = gauss_tower(n + 1)
    report = degree_report(tower, n, build_det_lift(tower, n))
    assert (report.group_order, report.image_size, report.kernel_size) == (order, image, kernel)
    assert report.surjective


@pytest.mark.parametrize("n", range(2, 6))
def test_degree_index_identity(n):
    tower = gauss_tower(n + 1)
    report = degree_report(tower, n, build_det_lift(tower, n))
    assert report.kernel_size * report.image_size == tower.level(n).order
    assert report.image_size == unit_count(2 ** (n + 1)) == 2**n


def test_degree_report_needs_a_well_defined_lift():
    tower = Tower.full_normalizer(2, MINUS_SEVEN, n_top=3)
    with pytest.raises(LiftNotWellDefined) as info:
        degree_report(tower, 2, build_det_lift(tower, 2))
    assert info.value.witness is not None


# n0

@pytest.mark.parametrize("verdicts, expected", [
    ({1: False, 2: True, 3: True}, 2),
    ({1: True, 2: False, 3: True}, 3),
    ({1: True, 2: True}, 1),
    ({1: True, 2: False}, None),
    ({}, None),
])
def test_least_n0(verdicts, expected):
    assert least_n0(verdicts) == expected


def test_n0_gaussian():
    assert n0_search(gauss_tower(7), 6) == 2


def test_n0_odd_discriminant_never_settles():
    assert n0_search(Tower.full_normalizer(2, MINUS_SEVEN, n_top=7), 6) is None


def test_n0_odd_prime_never_settles():
    tower = Tower.full_normalizer(5, PhiDelta.raw(delta=2, phi=0), n_top=5)
    assert n0_search(tower, 4) is None
    assert kernel_report(tower, 1).witness == Mat2((6, 0, 0, 6), 25)


def test_n0_needs_the_level_above():
    with pytest.raises(MissingLevel):
        n0_search(gauss_tower(4), 4)


# every even-discriminant order at p = 2

EVEN_ORDERS = [
    (d, f)
    for d in fundamental_discriminants(-20, -3)
    for f in (1, 2, 3)
    if is_even_discriminant(validate_order(d, f))
]


@pytest.mark.parametrize("delta_K, f", EVEN_ORDERS)
def test_even_discriminant_kernels_in_sl2(delta_K, f):
    params = phi_delta(validate_order(delta_K, f), Parity.EVEN)
    tower = Tower.full_normalizer(2, params, n_top=7, n_min=2)
    for n in range(2, 7):
        assert reduction_kernel(tower, n).in_sl2


def test_odd_discriminant_at_two_has_no_n0():
    params = phi_delta(validate_order(-15, 1), Parity.EVEN)
    assert n0_search(Tower.full_normalizer(2, params, n_top=6), 5) is None


# towers

def test_lazy_levels_and_budget():
    tower = gauss_tower(4)
    assert tower.source is TowerSource.FULL_NORMALIZER
    assert tower.size_bound(3) == 128
    assert tower.level(3).order == 64
    assert tower.size_bound(3) == 64
    with pytest.raises(MissingLevel):
        tower.level(5)
    small = Tower.full_normalizer(2, GAUSS, n_top=4, cap=100)
    with pytest.raises(ClosureBudgetExceeded):
        small.level(3)


def test_generated_tower_reproduces_the_normalizer():
    full = gauss_tower(4)
    generators = {n: list(full.level(n)) for n in (1, 2, 3, 4)}
    tower = Tower.generated(2, generators)
    assert tower.source is TowerSource.GENERATED
    for n in (1, 2, 3, 4):
        assert tower.level(n).elements == full.level(n).elements
    assert verify_tower(tower, 1, 3).n0 == 2


def test_trivial_tower_is_vacuously_entangled():
    tower = Tower.generated(2, {1: [], 2: [], 3: []})
    report = verify_tower(tower, 1, 2)
    assert report.n0 == 1
    assert all(level.kernel.size == 1 for level in report.levels)


def test_generated_tower_checks_reduction():
    with pytest.raises(TowerNotCompatible):
        Tower.generated(2, {1: [], 2: [Mat2((1, 1, 0, 1), 4)]})


def test_generated_tower_needs_contiguous_levels():
    with pytest.raises(MissingLevel):
        Tower.generated(2, {1: [], 3: []})
    with pytest.raises(MissingLevel):
        Tower.generated(2, {})


def test_empty_fiber():
    tower = Tower.generated(2, {1: [Mat2((1, 1, 0, 1), 2)], 2: []})
    with pytest.raises(EmptyFiber):
        build_det_lift(tower, 1)


# full reports

def test_verify_tower_gaussian_rows():
    report = verify_tower(gauss_tower(7), 1, 6)
    assert report.n0 == 2
    first = report.levels[0].as_dict()
    assert first["witness"] == {"matrix": "3,0,0,1", "det": 3}
    assert first["lift_well_defined"] is False
    assert first["lift_image_size"] is None
    assert first["lift_failure"] is not None
    second = report.levels[1].as_dict()
    assert second["in_sl2"] and second["diagram_commutes"]
    assert (second["group_order"], second["lift_image_size"], second["lift_kernel_size"]) == (16, 4, 4)


def test_verify_tower_odd_order_from_level_two():
    params = phi_delta(validate_order(-7, 1), Parity.EVEN)
    report = verify_tower(Tower.full_normalizer(2, params, n_top=5, n_min=2), 2, 4)
    assert report.n0 is None
    assert not any(level.kernel.in_sl2 for level in report.levels)


def test_raw_params_match_order_params():
    raw = verify_tower(Tower.full_normalizer(2, PhiDelta.raw(-4, 0), n_top=4), 1, 3)
    from_order = verify_tower(
        Tower.full_normalizer(2, phi_delta(validate_order(-4, 2), Parity.EVEN), n_top=4), 1, 3
    )
    assert [r.as_dict() for r in raw.levels] == [r.as_dict() for r in from_order.levels]
