import pytest
from hypothesis import given, strategies as st

from velm.alphabet import CANONICAL, MASK
from velm.errors import (
    DuplicatePosition,
    EmptyMaskSet,
    EmptyVariant,
    GeneMismatch,
    InvalidResidue,
    PositionOutOfRange,
    WildtypeMismatch,
)
from velm.sequence import (
    MaskedSequence,
    ProteinSequence,
    Substitution,
    Variant,
    apply_variant,
    bind_variant,
    derive_variant,
    invert_variant,
    mask_at,
    mutation_set,
)


def seq(residues, gene="G1"):
    return ProteinSequence(gene, residues)


def var(gene, *subs):
    return Variant.of(gene, [Substitution(p, wt, mt) for p, wt, mt in subs])


# -- strategies --------------------------------------------------------------

@st.composite
def sequences(draw, min_len=1, max_len=30):
    length = draw(st.integers(min_len, max_len))
    residues = "".join(draw(st.lists(
        st.sampled_from(CANONICAL), min_size=length, max_size=length)))
    return ProteinSequence("G1", residues)


@st.composite
def bound_pairs(draw, max_subs=3):
    wildtype = draw(sequences())
    n = draw(st.integers(1, min(max_subs, len(wildtype))))
    positions = draw(
        st.lists(st.integers(1, len(wildtype)), min_size=n, max_size=n, unique=True)
    )
    subs = []
    for pos in positions:
        wt = wildtype.residue_at(pos)
        mt = draw(st.sampled_from([aa for aa in CANONICAL if aa != wt]))
        subs.append(Substitution(pos, wt, mt))
    return wildtype, Variant.of("G1", subs)


# -- construction invariants --------------------------------------------------

def test_sequence_rejects_empty():
    with pytest.raises(ValueError):
        seq("")


def test_sequence_rejects_mask_char():
    with pytest.raises(InvalidResidue):
        seq("MK?T")


def test_sequence_accepts_unknown_at_type_level():
    assert seq("MXT").residue_at(2) == "X"


def test_residue_at_bounds():
    s = seq("MKT")
    assert s.residue_at(1) == "M"
    assert s.residue_at(3) == "T"
    for pos in (0, 4, -1):
        with pytest.raises(PositionOutOfRange):
            s.residue_at(pos)


def test_substitution_rejects_synonymous():
    with pytest.raises(ValueError):
        Substitution(2, "K", "K")


def test_substitution_rejects_mask_and_unknown():
    with pytest.raises(InvalidResidue):
        Substitution(2, MASK, "K")
    with pytest.raises(InvalidResidue):
        Substitution(2, "X", "K")


def test_variant_requires_substitutions():
    with pytest.raises(EmptyVariant):
        Variant.of("G1", [])


def test_variant_rejects_duplicate_positions():
    with pytest.raises(DuplicatePosition):
        var("G1", (2, "K", "R"), (2, "K", "A"))


def test_variant_sorts_substitutions():
    v = var("G1", (3, "T", "A"), (2, "K", "R"))
    assert v.positions() == (2, 3)
    assert v == var("G1", (2, "K", "R"), (3, "T", "A"))


# -- mutation_set / apply_variant ---------------------------------------------

def test_mutation_set_single():
    assert mutation_set(seq("MKT"), var("G1", (2, "K", "R"))) == {2}


def test_mutation_set_multi():
    assert mutation_set(seq("MKT"), var("G1", (2, "K", "R"), (3, "T", "A"))) == {2, 3}


def test_mutation_set_wildtype_mismatch():
    with pytest.raises(WildtypeMismatch):
        mutation_set(seq("MKT"), var("G1", (2, "Q", "R")))


def test_mutation_set_out_of_range():
    with pytest.raises(PositionOutOfRange):
        mutation_set(seq("MKT"), var("G1", (4, "K", "R")))


def test_mutation_set_gene_mismatch():
    with pytest.raises(GeneMismatch):
        mutation_set(seq("MKT", gene="G2"), var("G1", (2, "K", "R")))


def test_apply_variant_single():
    assert apply_variant(seq("MKT"), var("G1", (2, "K", "R"))).residues == "MRT"


def test_apply_variant_multi():
    assert (
        apply_variant(seq("MKT"), var("G1", (2, "K", "R"), (3, "T", "A"))).residues
        == "MRA"
    )


def test_apply_variant_keeps_gene_id():
    assert apply_variant(seq("MKT"), var("G1", (2, "K", "R"))).gene_id == "G1"


# -- masking -------------------------------------------------------------------

def test_mask_at_renders_mask_char():
    masked = mask_at(seq("MKT"), {2})
    assert masked.rendered == "M?T"
    assert masked.masked_positions == (2,)


def test_mask_at_out_of_range():
    with pytest.raises(PositionOutOfRange):
        mask_at(seq("MKT"), {4})


def test_mask_at_empty():
    with pytest.raises(EmptyMaskSet):
        mask_at(seq("MKT"), set())


def test_mask_at_deterministic():
    assert mask_at(seq("MKT"), {1, 3}) == mask_at(seq("MKT"), {3, 1})


def test_mask_identity_example():
    wildtype = seq("MKT")
    v = var("G1", (2, "K", "R"))
    mutant = apply_variant(wildtype, v)
    assert mask_at(wildtype, {2}) == mask_at(mutant, {2})


# -- properties ----------------------------------------------------------------

@given(bound_pairs())
def test_mask_identity_property(pair):
    wildtype, variant = pair
    positions = mutation_set(wildtype, variant)
    assert mask_at(wildtype, positions) == mask_at(apply_variant(wildtype, variant), positions)


@given(bound_pairs())
def test_round_trip_recovers_substitutions(pair):
    wildtype, variant = pair
    assert derive_variant(wildtype, apply_variant(wildtype, variant)) == variant


@given(bound_pairs())
def test_apply_variant_is_involution_under_inverse(pair):
    wildtype, variant = pair
    mutant = apply_variant(wildtype, variant)
    assert apply_variant(mutant, invert_variant(variant)) == wildtype


@given(bound_pairs())
def test_masked_rendering_differs_exactly_at_masked_positions(pair):
    wildtype, variant = pair
    positions = mutation_set(wildtype, variant)
    masked = mask_at(wildtype, positions)
    for i, (a, b) in enumerate(zip(wildtype.residues, masked.rendered), start=1):
        assert (a != b) == (i in positions)
        assert b == MASK or b == a


def test_bind_variant_returns_variant():
    v = var("G1", (2, "K", "R"))
    assert bind_variant(seq("MKT"), v) is v


def test_derive_variant_length_mismatch():
    with pytest.raises(ValueError):
        derive_variant(seq("MKT"), seq("MKTA"))


def test_masked_sequence_is_value_type():
    a = MaskedSequence("G1", (2,), "M?T")
    b = MaskedSequence("G1", (2,), "M?T")
    assert a == b and hash(a) == hash(b)
