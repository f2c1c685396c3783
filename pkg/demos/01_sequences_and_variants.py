"""Sequences, variants and masking: the core vocabulary.

A variant is a set of substitutions against a gene's wildtype. Masking the
wildtype at the mutated positions gives the same rendered context as masking
the mutant there — the identity that lets one backend query serve every
variant sharing a mutation set.
"""

from velm import (
    ProteinSequence,
    apply_variant,
    derive_variant,
    mask_at,
    mutation_set,
    parse_variant,
)

wildtype = ProteinSequence("KRAS", "MTEYKLVVVGAGGVGKSALTIQLIQNHFVDE")
print(f"wildtype {wildtype.gene_id}: {wildtype.residues} (length {len(wildtype)})")

# Parse clinical notation, in either style.
v_short = parse_variant("G12D", "KRAS")
v_hgvs = parse_variant("p.Gly12Asp", "KRAS")
print("short == hgvs parse:", v_short == v_hgvs)

positions = mutation_set(wildtype, v_short)
print("mutation set:", sorted(positions))

mutant = apply_variant(wildtype, v_short)
print(f"mutant:   {mutant.residues}")
print("recovered variant:", derive_variant(wildtype, mutant) == v_short)

# The masked context is shared between wildtype and mutant.
masked_wt = mask_at(wildtype, positions)
masked_mt = mask_at(mutant, positions)
print(f"masked:   {masked_wt.rendered}")
print("masked contexts equal:", masked_wt == masked_mt)

# Multi-substitution variants join with ';'.
double = parse_variant("G12D;V14I", "KRAS")
print("double variant positions:", double.positions())
print("double masked:", mask_at(wildtype, mutation_set(wildtype, double)).rendered)
