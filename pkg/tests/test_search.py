import itertools
import random

import pytest
from helpers import all_frames, formulas
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ignorance_toolkit.errors import BudgetExceededError
from ignorance_toolkit.formula import (
    And,
    Atom,
    Bot,
    Box,
    Bullet,
    Formula,
    Fragment,
    Nabla,
    Not,
    Top,
    parse,
)
from ignorance_toolkit.model import NeighborhoodFrame, NeighborhoodModel, Property
from ignorance_toolkit.search import (
    DefinablePair,
    check_bullet_morphism,
    check_definability,
    definable_pool,
    distinguishable,
    enumerate_frames,
    find_countermodel,
    frames_indistinguishable,
    search_countermodel,
    separates,
)
from ignorance_toolkit.semantics import satisfies, truth_set

P = Property


def model(states: list[str], nbhd: dict[str, list[list[str]]], p: list[str]) -> NeighborhoodModel:
    frame = NeighborhoodFrame.from_labels(states, nbhd)
    return NeighborhoodModel.from_labels(frame, {"p": p})


def p6_models() -> tuple[NeighborhoodModel, NeighborhoodModel]:
    m = model(["s", "t"], {"s": [["s", "t"]], "t": [["s", "t"]]}, ["t"])
    m2 = model(["s'", "t'"], {"s'": [["t'"], ["s'", "t'"]], "t'": [["s'", "t'"]]}, ["t'"])
    return m, m2


def remark_models() -> tuple[NeighborhoodModel, NeighborhoodModel]:
    m = model(["s", "t"], {"s": [[], ["s"], ["s", "t"]], "t": [["t"]]}, [])
    m2 = model(["s'", "t'"], {"s'": [["s'"], ["s'", "t'"]], "t'": [[], ["t'"]]}, [])
    return m, m2


# --------------------------------------------------------------------------
# Enumeration
# --------------------------------------------------------------------------


def test_frame_space_sizes() -> None:
    assert sum(1 for _ in enumerate_frames(1)) == 4  # noqa: PLR2004
    assert sum(1 for _ in enumerate_frames(2)) == 256  # noqa: PLR2004
    assert sum(1 for _ in enumerate_frames(1, {P.N})) == 2  # noqa: PLR2004


def test_enumeration_is_canonical_and_unique() -> None:
    masks = [f.masks for f in enumerate_frames(2)]
    assert masks == sorted(masks)
    assert len(set(masks)) == len(masks)
    assert next(iter(enumerate_frames(2))).states == ("s", "t")


@pytest.mark.parametrize(
    "props",
    [
        {P.N},
        {P.T},
        {P.C, P.D},
        {P.B},
        {P.FOUR},
        {P.FIVE},
        {P.QUASI_FILTER},
        {P.FILTER},
        {P.T, P.FIVE},
    ],
)
def test_enumeration_matches_filtering(props: set[Property]) -> None:
    for size in (1, 2):
        expected = [
            f.masks for f in enumerate_frames(size) if all(f.has_property(p) for p in props)
        ]
        assert [f.masks for f in enumerate_frames(size, props)] == expected


def test_enumeration_bounds() -> None:
    with pytest.raises(ValueError, match="only be sampled"):
        list(enumerate_frames(4))
    with pytest.raises(ValueError, match="1 to 4"):
        list(enumerate_frames(5, sampled=True))


def test_sampled_enumeration_is_seeded() -> None:
    first = [f.masks for f in enumerate_frames(4, sampled=True, seed=11, sample_size=40)]
    again = [f.masks for f in enumerate_frames(4, sampled=True, seed=11, sample_size=40)]
    other = [f.masks for f in enumerate_frames(4, sampled=True, seed=12, sample_size=40)]
    assert first == again
    assert len(first) == 40  # noqa: PLR2004
    assert first != other


def test_sampled_enumeration_respects_properties() -> None:
    for frame in enumerate_frames(3, {P.N, P.T}, sampled=True, seed=3, sample_size=50):
        assert frame.has_property(P.N)
        assert frame.has_property(P.T)


# --------------------------------------------------------------------------
# Countermodel search
# --------------------------------------------------------------------------


def test_find_countermodel_not_nabla() -> None:
    found = find_countermodel(parse("~nabla p"), frozenset(), 2, progress=False)
    assert found is not None
    m, state = found
    assert m.frame.masks == (0,)
    assert state == "s"
    assert satisfies(m, state, parse("nabla p"))


def test_find_countermodel_none_for_e2() -> None:
    assert find_countermodel(parse("bullet p -> p"), frozenset(), 2, progress=False) is None


def test_second_order_does_not_reduce() -> None:
    f = parse("nabla nabla p -> nabla p")
    found = find_countermodel(f, frozenset(), 2, progress=False)
    assert found is not None
    m, state = found
    assert m.size == 2  # noqa: PLR2004
    assert not satisfies(m, state, f)


@pytest.mark.parametrize(
    "text",
    [
        "bullet p -> nabla p",
        "nabla (p | q) & nabla (~p | r) -> nabla p",
        "circ true",
    ],
)
def test_negative_controls_re_check(text: str) -> None:
    f = parse(text)
    found = find_countermodel(f, frozenset(), 2, progress=False)
    assert found is not None
    m, state = found
    assert not satisfies(m, state, f)


def test_search_is_independent_of_jobs() -> None:
    f = parse("nabla nabla p -> nabla p")
    inline = search_countermodel(f, frozenset(), 2, jobs=1, progress=False)
    pooled = search_countermodel(f, frozenset(), 2, jobs=2, progress=False)
    assert inline == pooled


def test_frame_budget() -> None:
    with pytest.raises(BudgetExceededError, match="frame budget is 100"):
        search_countermodel(parse("p"), frozenset(), 2, frame_budget=100, progress=False)


def test_valuation_guard() -> None:
    with pytest.raises(BudgetExceededError, match="valuations per frame"):
        search_countermodel(parse("p & q & r"), frozenset(), 2, valuation_bits=5, progress=False)


def test_bound_checks() -> None:
    with pytest.raises(ValueError, match="max_states"):
        search_countermodel(parse("p"), frozenset(), 5, progress=False)
    with pytest.raises(ValueError, match="exhaustive_states"):
        search_countermodel(parse("p"), frozenset(), 2, exhaustive_states=4, progress=False)


# --------------------------------------------------------------------------
# Definability
# --------------------------------------------------------------------------


def test_circ_true_defines_n_up_to_two_states() -> None:
    report = check_definability(parse("circ true"), P.N, 2, progress=False)
    assert report.defines
    assert report.frames_checked == 4 + 256  # noqa: PLR2004
    assert report.first_violation is None
    assert report.to_dict()["violations"] == 0


def test_definability_sampled_three_states() -> None:
    report = check_definability(
        parse("circ true"),
        P.N,
        3,
        exhaustive_states=2,
        sample_size=2000,
        seed=5,
        progress=False,
    )
    assert report.defines
    assert report.sampled_sizes == (3,)
    assert report.frames_checked == 4 + 256 + 2000  # noqa: PLR2004


def test_definability_reports_violations() -> None:
    report = check_definability(parse("box true"), P.T, 1, progress=False)
    assert not report.defines
    assert report.violations > 0
    assert report.first_violation is not None
    assert "first_violation" in report.to_dict()


@pytest.mark.slow
def test_circ_true_defines_n_on_a_million_sampled_frames() -> None:
    report = check_definability(
        parse("circ true"),
        P.N,
        3,
        exhaustive_states=2,
        sample_size=1_000_000,
        seed=1729,
        frame_budget=1_000_260,
        progress=False,
    )
    assert report.defines
    assert report.violations == 0
    assert report.frames_checked == 4 + 256 + 1_000_000  # noqa: PLR2004


def test_sample_beyond_frame_budget_is_refused() -> None:
    with pytest.raises(BudgetExceededError, match="frame budget is 1000000"):
        check_definability(
            parse("circ true"),
            P.N,
            3,
            exhaustive_states=2,
            sample_size=1_000_000,
            frame_budget=1_000_000,
            progress=False,
        )


@pytest.mark.slow
def test_circ_true_defines_n_on_every_three_state_frame() -> None:
    report = check_definability(
        parse("circ true"), P.N, 3, exhaustive_states=3, frame_budget=17_000_000, progress=False
    )
    assert report.defines
    assert report.frames_checked == 4 + 256 + 16_777_216  # noqa: PLR2004


# --------------------------------------------------------------------------
# Distinguishability
# --------------------------------------------------------------------------


def test_bullet_cannot_separate_p6_models() -> None:
    m, m2 = p6_models()
    assert distinguishable(m, "s", m2, "s'", Fragment.from_name("bullet"), ["p"]) is None


def test_nabla_separates_p6_models() -> None:
    m, m2 = p6_models()
    witness = distinguishable(m, "s", m2, "s'", Fragment.from_name("nabla"), ["p"])
    assert witness is not None
    assert separates(witness, m, "s", m2, "s'")
    assert truth_set(m, witness.formula) == truth_set(m, parse("nabla p"))
    assert truth_set(m2, witness.formula) == truth_set(m2, parse("nabla p"))


def test_remark_models() -> None:
    m, m2 = remark_models()
    assert distinguishable(m, "s", m2, "s'", Fragment.from_name("nabla-bullet"), ["p"]) is None
    witness = distinguishable(m, "s", m2, "s'", Fragment.from_name("box"), ["p"])
    assert witness is not None
    assert separates(witness, m, "s", m2, "s'")
    assert satisfies(m, "s", parse("box false"))
    assert not satisfies(m2, "s'", parse("box false"))


def test_propositional_fragment_separates_by_atoms() -> None:
    m, m2 = p6_models()
    witness = distinguishable(m, "s", m2, "t'", Fragment.from_name("propositional"), ["p"])
    assert witness is not None
    assert witness.formula == Atom("p")


def test_default_vocabulary_is_nonempty_atoms() -> None:
    m, m2 = remark_models()
    # p is empty in both models, so only constants are available
    assert distinguishable(m, "s", m2, "s'", Fragment.from_name("box")) is not None
    assert distinguishable(m, "s", m2, "s'", Fragment.from_name("nabla-bullet")) is None


def test_witness_trace_is_sound() -> None:
    m, m2 = p6_models()
    witness = distinguishable(m, "s", m2, "s'", Fragment.from_name("nabla-bullet"), ["p"])
    assert witness is not None
    assert witness.trace[-1][0] == witness.formula
    for sub, pair in witness.trace:
        assert pair == DefinablePair(truth_set(m, sub), truth_set(m2, sub))


@pytest.mark.parametrize("name", ["nabla", "bullet", "nabla-bullet", "box"])
def test_pool_formulas_define_their_pairs(name: str) -> None:
    for m, m2 in (p6_models(), remark_models()):
        pool = definable_pool(m, m2, Fragment.from_name(name), ["p"])
        assert DefinablePair(0, 0) in pool
        assert DefinablePair(m.frame.full, m2.frame.full) in pool
        for pair, f in pool.items():
            assert pair == DefinablePair(truth_set(m, f), truth_set(m2, f))


def _formulas_up_to_depth(depth: int, frag: Fragment) -> list[Formula]:
    layer: list[Formula] = [Atom("p"), Top(), Bot()]
    seen = list(layer)
    mods = {"nabla": Nabla, "bullet": Bullet, "box": Box}
    for _ in range(depth):
        nxt: list[Formula] = []
        for f in layer:
            nxt.append(Not(f))
            nxt.extend(mods[mod.value](f) for mod in frag.ordered())
        for f, g in itertools.product(layer, seen):
            nxt.append(And(f, g))
        seen.extend(nxt)
        layer = nxt
    return seen


def test_indistinguishable_agrees_with_brute_force() -> None:
    cases = [
        (*p6_models(), "s", "s'", "bullet"),
        (*remark_models(), "s", "s'", "nabla-bullet"),
    ]
    for m, m2, s, s2, name in cases:
        frag = Fragment.from_name(name)
        assert distinguishable(m, s, m2, s2, frag, ["p"]) is None
        for f in _formulas_up_to_depth(2, frag):
            assert satisfies(m, s, f) == satisfies(m2, s2, f), f


# --------------------------------------------------------------------------
# Bullet morphisms
# --------------------------------------------------------------------------


def test_p6_morphism() -> None:
    m, m2 = p6_models()
    assert check_bullet_morphism(m, m2, {"s": "s'", "t": "t'"})
    assert not check_bullet_morphism(m, m2, {"s": "t'", "t": "s'"})


def test_identity_is_a_morphism() -> None:
    for m in (*p6_models(), *remark_models()):
        assert check_bullet_morphism(m, m, {s: s for s in m.states})


def test_morphism_mapping_errors() -> None:
    m, m2 = p6_models()
    with pytest.raises(ValueError, match="not total"):
        check_bullet_morphism(m, m2, {"s": "s'"})
    with pytest.raises(ValueError, match="Unknown state"):
        check_bullet_morphism(m, m2, {"s": "s'", "t": "x"})
    with pytest.raises(ValueError, match="Unknown source"):
        check_bullet_morphism(m, m2, {"s": "s'", "t": "t'", "u": "t'"})


@settings(max_examples=200, suppress_health_check=[HealthCheck.too_slow])
@given(formulas(("p",), modal=(Bullet,)))
def test_bullet_formulas_are_invariant_under_morphism(f: Formula) -> None:
    m, m2 = p6_models()
    mapping = {"s": "s'", "t": "t'"}
    for s, s2 in mapping.items():
        assert satisfies(m, s, f) == satisfies(m2, s2, f)


def test_random_morphisms_preserve_bullet_truth() -> None:
    rng = random.Random(2024)
    frames = all_frames(2)
    bullet_formulas = [
        parse(t)
        for t in ("bullet p", "bullet ~p", "~bullet (p & bullet p)", "bullet (p | bullet ~p)")
    ]
    found = 0
    for _ in range(400):
        m = NeighborhoodModel.from_sets(rng.choice(frames), {"p": rng.randrange(4)})
        if rng.random() < 0.25:  # noqa: PLR2004
            m2 = m
        else:
            m2 = NeighborhoodModel.from_sets(rng.choice(frames), {"p": rng.randrange(4)})
        for image in itertools.product(m2.states, repeat=2):
            mapping = dict(zip(m.states, image, strict=True))
            if not check_bullet_morphism(m, m2, mapping):
                continue
            found += 1
            for f in bullet_formulas:
                for s, s2 in mapping.items():
                    assert satisfies(m, s, f) == satisfies(m2, s2, f)
    assert found > 0


# --------------------------------------------------------------------------
# Frame correspondence
# --------------------------------------------------------------------------


def test_identical_frames_correspond() -> None:
    frame = NeighborhoodFrame.from_labels(["s", "t"], {"s": [["t"]], "t": [["s"]]})
    frag = Fragment.from_name("nabla-bullet")
    result = frames_indistinguishable(frame, frame, [("s", "s"), ("t", "t")], frag)
    assert result.holds
    assert result.valuations_checked == 4  # noqa: PLR2004


def test_correspondence_failure_carries_witness() -> None:
    frame = NeighborhoodFrame.from_labels(["s"], {"s": [["s"]]})
    frame2 = NeighborhoodFrame.from_labels(["s'"], {})
    result = frames_indistinguishable(frame, frame2, [("s", "s'")], Fragment.from_name("bullet"))
    assert not result.holds
    assert result.failure is not None
    m, a, m2, b, witness = result.failure
    assert separates(witness, m, a, m2, b)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(all_frames(1)), st.sampled_from(all_frames(1)))
def test_one_state_correspondence_matches_pointwise(
    frame: NeighborhoodFrame, frame2: NeighborhoodFrame
) -> None:
    frag = Fragment.from_name("nabla-bullet")
    result = frames_indistinguishable(frame, frame2, [("s", "s")], frag)
    expected = all(
        distinguishable(
            NeighborhoodModel.from_sets(frame, {"p": v}),
            "s",
            NeighborhoodModel.from_sets(frame2, {"p": v}),
            "s",
            frag,
            ["p"],
        )
        is None
        for v in (0, 1)
    )
    assert result.holds == expected
