"""Shared string tags for boundary conditions, PDE kinds and symbol variants."""

BC_DIRICHLET = "dirichlet"
BC_NEUMANN = "neumann"
BC_KINDS = (BC_DIRICHLET, BC_NEUMANN)

PDE_POISSON = "poisson"
PDE_REACTION = "reaction"
PDE_KINDS = (PDE_POISSON, PDE_REACTION)

VARIANT_POLY = "poly"
VARIANT_EXP = "exp"
VARIANTS = (VARIANT_POLY, VARIANT_EXP)


def check_bc(bc):
    if bc not in BC_KINDS:
        raise ValueError(f"unknown boundary condition kind: {bc!r}")
    return bc


def check_pde(pde):
    if pde not in PDE_KINDS:
        raise ValueError(f"unknown equation kind: {pde!r}")
    return pde


def check_variant(variant):
    if variant not in VARIANTS:
        raise ValueError(f"unknown symbol variant: {variant!r}")
    return variant
