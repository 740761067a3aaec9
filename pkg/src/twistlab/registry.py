"""Registry of calibrated constants.

Several normalizing constants of the calculus are fixed only up to convention
("constant multiple").  Each one is calibrated once against an internal
oracle, frozen into ``data/constants.json`` with provenance, and looked up here.
Reports embed the registry hash so every number traceable to a calibrated
constant is auditable.

Pinned conventions (recorded in the data file):
  * c(0, 0) = 1, so the correspondence of the constant polynomial 1 is the
    identity operator;
  * the Gaussian pairing on bigraded polynomials uses normalized measure
    dz / (2 pi)^n, which together with c(0,0) = 1 makes the operator-harmonic
    normalizing constants match the level inner products exactly.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources

_cache = None


def _load() -> dict:
    global _cache
    if _cache is None:
        path = resources.files("twistlab").joinpath("data/constants.json")
        _cache = json.loads(path.read_text())
    return _cache


def registry_dict() -> dict:
    return _load()


def registry_hash() -> str:
    blob = json.dumps(_load(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _entry(name: str):
    reg = _load()["constants"]
    if name not in reg:
        raise KeyError(f"registry has no constant named {name!r}; run twistlab.calibrate")
    return reg[name]


def monomial_constant(a: int, b: int) -> float:
    """Base constant c(a, b) of the monomial correspondence (lam = 1 scale)."""
    if a == 0 and b == 0:
        return 1.0
    key = f"{a},{b}"
    table = _entry("weyl_monomial_c")["value"]
    if key in table:
        return table[key]
    # rare pair: derive on demand with the same oracle that built the registry
    from .calibrate import calibrate_monomial_constant
    return calibrate_monomial_constant(a, b)[0]


def plancherel_constant(n: int = 1) -> float:
    """C_n with ||f||_2^2 = C_n |lam|^n ||W_lam(f)||_HS^2 (calibrated at n = 1)."""
    if n != 1:
        raise ValueError("only n = 1 is calibrated")
    return _entry("plancherel_c1")["value"]


def heat_mass_constant(n: int = 1) -> float:
    """C with int p_t^lam = C cosh(t|lam|)^{-n} (calibrated at n = 1)."""
    if n != 1:
        raise ValueError("only n = 1 is calibrated")
    return _entry("heat_mass_c1")["value"]


def hecke_bochner_constant(a: int, b: int) -> float:
    """Proportionality in the radial-factorization identity at n = 1."""
    key = f"{a},{b}"
    table = _entry("hecke_bochner_c1")["value"]
    if key not in table:
        from .calibrate import calibrate_hecke_bochner
        return calibrate_hecke_bochner(a, b)[0]
    return table[key]


def fundamental_constant() -> float:
    """c in K_lam(z) = c e^{-lam|z|^2/4} int (s(s+2))^{n/2-1} e^{-lam s |z|^2/4} ds, n = lam = 1."""
    return _entry("fundamental_c1")["value"]


def kgamma_fourier_constant() -> float:
    """C in int e^{-i Re(z.conj w)} K_gamma^0(w) dw = C (gamma^2 + |z|^2)^{-1/2}, n = 1."""
    return _entry("kgamma_fourier_c1")["value"]
