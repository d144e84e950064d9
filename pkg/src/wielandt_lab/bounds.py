"""Bound families, inequality checks, and lemma certifications.

For an instance (A, m, M, X, Y, Phi) and exponent p > 0 the central object is

    Gamma = (Phi(X*AY) Phi(Y*AY)^{-1} Phi(Y*AX))^p  Phi(X*AX)^{-p},

built strictly by spectral calculus on its two Hermitian factors S and T.
Three scalar bound families (``bound_thm1/2/3``) dominate both (Gamma+Gamma*)/2
and its spectral absolute value; every check here reports a Loewner verdict, a
norm verdict, and a signed margin.

Margin conventions: Loewner-style checks report the minimum eigenvalue of
(bound side - lhs side); scalar checks report (bound - lhs).  A check passes
when its margin is >= -tol * max(1, |lhs|, |bound|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidBounds, NotPSD, PreconditionViolated
from .instances import Instance, gen_operator
from .matcore import (
    EigDecomp,
    as_cmatrix,
    as_herm,
    eig_pow_pd,
    eig_pow_psd,
    herm_eig,
    herm_norm,
    hermitian_part,
    mat_pow,
    op_norm,
)
from .sampling import complex_gaussian, haar_unitary, mix_seed, rng_from

DEFAULT_TOL = 1e-9
ORDERING_TOL = 1e-12

# Deterministic emission order for aggregated reports.
ALL_CHECK_NAMES = (
    "bhatia_davis",
    "thm1_abs",
    "thm1_sym",
    "thm2_abs",
    "thm2_sym",
    "thm3_abs",
    "thm3_sym",
    "abs_implies_sym",
    "sym_norm_le_gamma",
    "gamma_norm_le_thm2",
    "thm1_chain",
    "power_monotone",
    "block_norm_equivalence",
    "square_order",
    "anticommutator_norm",
    "scalar_wielandt",
    "trial_error",
)


def _check_mM(m: float, M: float) -> tuple[float, float]:
    m = float(m)
    M = float(M)
    if not (math.isfinite(m) and math.isfinite(M)) or m <= 0.0 or M < m:
        raise InvalidBounds(f"need 0 < m <= M, got m={m!r}, M={M!r}")
    return m, M


def _check_p(p: float) -> float:
    p = float(p)
    if not math.isfinite(p) or p <= 0.0:
        raise InvalidBounds(f"need p > 0, got {p!r}")
    return p


def wielandt_factor(m: float, M: float) -> float:
    """((M - m)/(M + m))^2, the square of the spectral contrast."""
    m, M = _check_mM(m, M)
    return ((M - m) / (M + m)) ** 2


def ceil_exponent(p: float) -> int:
    """Ceiling of p with exponents within 1e-12 of an integer snapped first,
    so float parsing cannot flip the discontinuity."""
    p = _check_p(p)
    nearest = round(p)
    if abs(p - nearest) <= 1e-12 and nearest >= 1:
        return int(nearest)
    return int(math.ceil(p))


def bound_thm1(m: float, M: float, p: float) -> float:
    """Arithmetic-mean bound: (((M-m)/(M+m))^{4p} M^{2p} + m^{-2p}) / 2."""
    m, M = _check_mM(m, M)
    p = _check_p(p)
    ratio = (M - m) / (M + m)
    return (ratio ** (4.0 * p) * M ** (2.0 * p) + m ** (-2.0 * p)) / 2.0


def bound_thm2(m: float, M: float, p: float) -> float:
    """Two-branch bound: ((M-m)/(M+m))^{2p} for 0 < p <= 1/2, times (M/m)^p
    beyond; the left branch is closed at p = 1/2."""
    m, M = _check_mM(m, M)
    p = _check_p(p)
    base = ((M - m) / (M + m)) ** (2.0 * p)
    if p <= 0.5:
        return base
    return base * (M / m) ** p


def bound_thm3(m: float, M: float, p: float) -> float:
    """Ceiling-exponent bound:
    ((M-m)/(M+m))^{2p} * (((M/m)^{p/2} + (m/M)^{p/2}) / 2)^{ceil(p)}."""
    m, M = _check_mM(m, M)
    p = _check_p(p)
    base = ((M - m) / (M + m)) ** (2.0 * p)
    mean = ((M / m) ** (p / 2.0) + (m / M) ** (p / 2.0)) / 2.0
    return base * mean ** ceil_exponent(p)


def crossover_threshold(m: float, M: float) -> float:
    """2 + 2 log 2 / log(M/m): beyond this exponent the two-branch bound is
    tighter again than the ceiling-exponent bound."""
    m, M = _check_mM(m, M)
    if M == m:
        raise InvalidBounds("crossover undefined for m == M")
    return 2.0 + 2.0 * math.log(2.0) / math.log(M / m)


class Witness(NamedTuple):
    eigenvalue: float
    vector: np.ndarray

    def to_json(self) -> dict:
        return {
            "eigenvalue": self.eigenvalue,
            "re": self.vector.real.tolist(),
            "im": self.vector.imag.tolist(),
        }


@dataclass
class CheckReport:
    """Outcome of one inequality check (Loewner and/or norm form)."""

    check: str
    lhs: float
    bound: float
    margin: float
    loewner_pass: Optional[bool]
    norm_pass: Optional[bool]
    tol: float
    witness: Optional[Witness] = None
    context: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.check

    @property
    def passed(self) -> bool:
        flags = [f for f in (self.loewner_pass, self.norm_pass) if f is not None]
        return bool(flags) and all(flags)

    def to_json(self) -> dict:
        out = {
            "check": self.check,
            "lhs": self.lhs,
            "bound": self.bound,
            "margin": self.margin,
            "loewner_pass": self.loewner_pass,
            "norm_pass": self.norm_pass,
            "tol": self.tol,
        }
        for key in ("seed", "dims", "m", "M", "p"):
            out[key] = self.context.get(key)
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


@dataclass
class FlagReport:
    """A pure boolean meta-check (no numeric bound of its own)."""

    name: str
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"check": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class ChainReport:
    """Link-by-link certification of the norm chain behind the
    arithmetic-mean bound: ||Gamma+Gamma*||/2 <= ||S^{2p}+T^{-2p}||/2
    <= (||S||^{2p} + ||T^{-1}||^{2p})/2 <= bound_thm1."""

    name: str
    links: tuple  # the four chain values, weakest bound last
    link_margins: tuple  # successive differences, one per inequality
    passed: bool
    tol: float
    context: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return min(self.link_margins)

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "links": list(self.links),
            "link_margins": list(self.link_margins),
            "passed": self.passed,
            "tol": self.tol,
            **{k: self.context.get(k) for k in ("seed", "m", "M", "p")},
        }


@dataclass
class LemmaBlockReport:
    """Three-way equivalence of |X| <= tI, ||X|| <= t, and PSD-ness of
    [[tI, X], [X*, tI]]; passes when all three verdicts agree."""

    name: str
    t: float
    x_norm: float
    abs_ok: bool
    norm_ok: bool
    block_ok: bool
    tol: float

    @property
    def passed(self) -> bool:
        return self.abs_ok == self.norm_ok == self.block_ok

    @property
    def margin(self) -> float:
        # Distance from the decision boundary t = ||X||, where the three
        # verdicts could legitimately split.
        return abs(self.t - self.x_norm)

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "t": self.t,
            "x_norm": self.x_norm,
            "abs_ok": self.abs_ok,
            "norm_ok": self.norm_ok,
            "block_ok": self.block_ok,
            "agree": self.passed,
            "tol": self.tol,
        }


def _threshold(tol: float, *magnitudes: float) -> float:
    return tol * max(1.0, *(abs(v) for v in magnitudes))


# ---------------------------------------------------------------------------
# Gamma assembly
# ---------------------------------------------------------------------------


def compressed_products(inst: Instance) -> tuple[np.ndarray, np.ndarray]:
    """(S, T) with S = Phi(X*AY) Phi(Y*AY)^{-1} Phi(Y*AX) and T = Phi(X*AX),
    both symmetrized.  S is PSD because the map preserves adjoints."""
    a = hermitian_part(as_cmatrix(inst.a, square=True))
    xh = inst.x.conj().T
    yh = inst.y.conj().T
    bxy = inst.phi.apply(xh @ a @ inst.y)
    byx = inst.phi.apply(yh @ a @ inst.x)
    c = hermitian_part(inst.phi.apply(yh @ a @ inst.y))
    t = hermitian_part(inst.phi.apply(xh @ a @ inst.x))
    c_inv = eig_pow_pd(herm_eig(c), -1.0)
    s = hermitian_part(bxy @ c_inv @ byx)
    return s, t


@dataclass(eq=False)
class GammaParts:
    """S, T, the exponent, and Gamma = S^p T^{-p}, with the two spectral
    decompositions cached for downstream checks."""

    s: np.ndarray
    t: np.ndarray
    p: float
    gamma: np.ndarray
    m: float
    M: float
    s_eig: EigDecomp
    t_eig: EigDecomp


def gamma_from_products(
    s: np.ndarray,
    t: np.ndarray,
    p: float,
    m: float,
    M: float,
    s_eig: Optional[EigDecomp] = None,
    t_eig: Optional[EigDecomp] = None,
) -> GammaParts:
    p = _check_p(p)
    m, M = _check_mM(m, M)
    if s_eig is None:
        s_eig = herm_eig(s)
    if t_eig is None:
        t_eig = herm_eig(t)
    spread = 1e-8 * max(1.0, M)
    t_lo = float(t_eig.eigenvalues[0])
    t_hi = float(t_eig.eigenvalues[-1])
    if t_lo < m - spread or t_hi > M + spread:
        raise PreconditionViolated(
            f"compressed operator spectrum [{t_lo:g}, {t_hi:g}] escapes [{m:g}, {M:g}]"
        )
    g = eig_pow_psd(s_eig, p) @ eig_pow_pd(t_eig, -p)
    return GammaParts(s=s, t=t, p=p, gamma=g, m=m, M=M, s_eig=s_eig, t_eig=t_eig)


def gamma(inst: Instance, p: float) -> GammaParts:
    """Assemble Gamma for an instance; raises Singular when either compressed
    operator is numerically singular."""
    s, t = compressed_products(inst)
    return gamma_from_products(s, t, p, inst.m, inst.M)


class LhsValues(NamedTuple):
    half_abs: np.ndarray  # |Gamma + Gamma*| / 2
    half_sym: np.ndarray  # (Gamma + Gamma*) / 2
    half_abs_norm: float


def _half_sym_eig(g: GammaParts) -> tuple[np.ndarray, EigDecomp]:
    half_sym = (g.gamma + g.gamma.conj().T) / 2.0
    return half_sym, herm_eig(half_sym)


def lhs_values(g: GammaParts) -> LhsValues:
    """Both left-hand sides; the symmetrized form never exceeds its absolute
    value in the Loewner order."""
    half_sym, (w, v) = _half_sym_eig(g)
    half_abs = hermitian_part((v * np.abs(w)) @ v.conj().T)
    norm = float(np.max(np.abs(w))) if w.size else 0.0
    return LhsValues(half_abs, half_sym, norm)


# ---------------------------------------------------------------------------
# Instance-level checks
# ---------------------------------------------------------------------------


def _bound_fn(which: int):
    try:
        return {1: bound_thm1, 2: bound_thm2, 3: bound_thm3}[which]
    except KeyError:
        raise ValueError(f"which must be 1, 2, or 3, got {which!r}") from None


def check_bhatia_davis(inst: Instance, tol: float = DEFAULT_TOL) -> CheckReport:
    """Loewner check of S <= ((M-m)/(M+m))^2 T (the operator Wielandt
    inequality); the extremal instance sits on the equality boundary."""
    s, t = compressed_products(inst)
    factor = wielandt_factor(inst.m, inst.M)
    rhs = factor * t
    w, v = herm_eig(rhs - s)
    lam_min = float(w[0])
    s_norm = herm_norm(s)
    rhs_norm = herm_norm(rhs)
    thr = _threshold(tol, s_norm, rhs_norm)
    return CheckReport(
        check="bhatia_davis",
        lhs=s_norm,
        bound=rhs_norm,
        margin=lam_min,
        loewner_pass=lam_min >= -thr,
        norm_pass=s_norm <= rhs_norm + thr,
        tol=tol,
        witness=Witness(lam_min, v[:, 0].copy()),
        context={"seed": inst.seed, "m": inst.m, "M": inst.M},
    )


def _theorem_reports_from_eigs(
    w: np.ndarray,
    v: np.ndarray,
    bound: float,
    which: int,
    tol: float,
    context: dict,
) -> tuple[CheckReport, CheckReport]:
    abs_norm = float(np.max(np.abs(w))) if w.size else 0.0
    lam_max = float(w[-1]) if w.size else 0.0
    idx_abs = int(np.argmax(np.abs(w)))
    thr = _threshold(tol, abs_norm, bound)
    report_abs = CheckReport(
        check=f"thm{which}_abs",
        lhs=abs_norm,
        bound=bound,
        margin=bound - abs_norm,
        loewner_pass=abs_norm <= bound + thr,
        norm_pass=abs_norm <= bound + thr,
        tol=tol,
        witness=Witness(abs_norm, v[:, idx_abs].copy()),
        context=context,
    )
    report_sym = CheckReport(
        check=f"thm{which}_sym",
        lhs=abs_norm,
        bound=bound,
        margin=bound - lam_max,
        loewner_pass=lam_max <= bound + thr,
        norm_pass=abs_norm <= bound + thr,
        tol=tol,
        witness=Witness(lam_max, v[:, -1].copy()),
        context=context,
    )
    return report_abs, report_sym


def check_theorem(
    inst: Instance, p: float, which: int, tol: float = DEFAULT_TOL
) -> tuple[CheckReport, CheckReport]:
    """Check |Gamma+Gamma*|/2 <= bound*I and (Gamma+Gamma*)/2 <= bound*I for
    bound family `which`; returns (absolute-value form, symmetric form)."""
    g = gamma(inst, p)
    _, (w, v) = _half_sym_eig(g)
    bound = _bound_fn(which)(inst.m, inst.M, p)
    context = {"seed": inst.seed, "m": inst.m, "M": inst.M, "p": p}
    return _theorem_reports_from_eigs(w, v, bound, which, tol, context)


def gamma_norm(inst: Instance, p: float) -> float:
    """||Gamma||; its companion report `sym_gamma_norm_report` certifies that
    the symmetrized half-sum never beats it."""
    return op_norm(gamma(inst, p).gamma)


def _sym_norm_report(
    sym_norm: float, gnorm: float, tol: float, context: Optional[dict]
) -> CheckReport:
    thr = _threshold(tol, sym_norm, gnorm)
    return CheckReport(
        check="sym_norm_le_gamma",
        lhs=sym_norm,
        bound=gnorm,
        margin=gnorm - sym_norm,
        loewner_pass=None,
        norm_pass=sym_norm <= gnorm + thr,
        tol=tol,
        context=context or {},
    )


def sym_gamma_norm_report(
    g: GammaParts, tol: float = DEFAULT_TOL, context: Optional[dict] = None
) -> CheckReport:
    """||(Gamma+Gamma*)/2|| <= ||Gamma|| (triangle inequality, checked)."""
    _, (w, _) = _half_sym_eig(g)
    sym_norm = float(np.max(np.abs(w))) if w.size else 0.0
    return _sym_norm_report(sym_norm, op_norm(g.gamma), tol, context)


def _gamma_bound_report(
    gnorm: float, m: float, M: float, p: float, tol: float, context: Optional[dict]
) -> CheckReport:
    bound = bound_thm2(m, M, p)
    thr = _threshold(tol, gnorm, bound)
    return CheckReport(
        check="gamma_norm_le_thm2",
        lhs=gnorm,
        bound=bound,
        margin=bound - gnorm,
        loewner_pass=None,
        norm_pass=gnorm <= bound + thr,
        tol=tol,
        context=context or {},
    )


def gamma_norm_bound_report(
    g: GammaParts, tol: float = DEFAULT_TOL, context: Optional[dict] = None
) -> CheckReport:
    """||Gamma|| <= bound_thm2(m, M, p) (both exponent branches)."""
    return _gamma_bound_report(op_norm(g.gamma), g.m, g.M, g.p, tol, context)


def chain_report(
    g: GammaParts,
    tol: float = DEFAULT_TOL,
    context: Optional[dict] = None,
    half_sum_norm: Optional[float] = None,
) -> ChainReport:
    """The three-link norm chain leading to the arithmetic-mean bound."""
    p = g.p
    if half_sum_norm is None:
        half_sum_norm = op_norm(g.gamma + g.gamma.conj().T) / 2.0
    s2p = eig_pow_psd(g.s_eig, 2.0 * p)
    t2pinv = eig_pow_pd(g.t_eig, -2.0 * p)
    mixed_norm = herm_norm(s2p + t2pinv) / 2.0
    s_norm = max(float(g.s_eig.eigenvalues[-1]), 0.0)
    t_inv_norm = 1.0 / float(g.t_eig.eigenvalues[0])
    split = (s_norm ** (2.0 * p) + t_inv_norm ** (2.0 * p)) / 2.0
    top = bound_thm1(g.m, g.M, p)
    links = (half_sum_norm, mixed_norm, split, top)
    margins = tuple(
        links[i + 1] - links[i] + _threshold(tol, links[i], links[i + 1])
        for i in range(3)
    )
    passed = all(mg >= 0.0 for mg in margins)
    raw_margins = tuple(links[i + 1] - links[i] for i in range(3))
    return ChainReport(
        name="thm1_chain",
        links=links,
        link_margins=raw_margins,
        passed=passed,
        tol=tol,
        context=context or {},
    )


def power_monotone_report(
    g: GammaParts, tol: float = DEFAULT_TOL, context: Optional[dict] = None
) -> Optional[CheckReport]:
    """Loewner power inequality S^p <= ((M-m)/(M+m))^{2p} T^p, valid for
    0 < p <= 1 (operator monotonicity of fractional powers); None otherwise."""
    if g.p > 1.0 + 1e-12:
        return None
    factor = wielandt_factor(g.m, g.M) ** g.p
    sp = eig_pow_psd(g.s_eig, g.p)
    tp = eig_pow_pd(g.t_eig, g.p)
    w, v = herm_eig(factor * tp - sp)
    lam_min = float(w[0])
    lhs_norm = max(float(g.s_eig.eigenvalues[-1]), 0.0) ** g.p
    bound_norm = factor * float(g.t_eig.eigenvalues[-1]) ** g.p
    thr = _threshold(tol, lhs_norm, bound_norm)
    return CheckReport(
        check="power_monotone",
        lhs=lhs_norm,
        bound=bound_norm,
        margin=lam_min,
        loewner_pass=lam_min >= -thr,
        norm_pass=lhs_norm <= bound_norm + thr,
        tol=tol,
        witness=Witness(lam_min, v[:, 0].copy()),
        context=context or {},
    )


# ---------------------------------------------------------------------------
# Lemma and scalar checks
# ---------------------------------------------------------------------------


def check_lemma_block_equivalence(
    x, t: float, tol: float = DEFAULT_TOL
) -> LemmaBlockReport:
    """Evaluate |X| <= tI, ||X|| <= t, and [[tI, X], [X*, tI]] >= 0 by three
    separate routes and assert they agree."""
    xm = as_cmatrix(x, square=True)
    t = float(t)
    if t < 0.0 or not math.isfinite(t):
        raise ValueError(f"need t >= 0, got {t!r}")
    n = xm.shape[0]
    x_norm = op_norm(xm)
    thr = _threshold(tol, t, x_norm)

    abs_x = mat_pow(hermitian_part(xm.conj().T @ xm), 0.5)
    abs_ok = float(herm_eig(abs_x).eigenvalues[-1]) <= t + thr

    norm_ok = x_norm <= t + thr

    eye = np.eye(n, dtype=np.complex128)
    block = np.block([[t * eye, xm], [xm.conj().T, t * eye]])
    w, _ = herm_eig(block)
    block_ok = float(w[0]) >= -thr

    return LemmaBlockReport(
        name="block_norm_equivalence",
        t=t,
        x_norm=x_norm,
        abs_ok=abs_ok,
        norm_ok=norm_ok,
        block_ok=block_ok,
        tol=tol,
    )


def check_lemma_square_order(
    a, b, m: float, M: float, tol: float = DEFAULT_TOL
) -> CheckReport:
    """Given 0 <= A <= B with spectrum(B) inside [m, M], certify the
    Kantorovich-type squared comparison A^2 <= ((M+m)^2 / 4Mm) B^2."""
    m, M = _check_mM(m, M)
    am = as_herm(a)
    bm = as_herm(b)
    wa, _ = herm_eig(am)
    wb, _ = herm_eig(bm)
    pre_thr = _threshold(tol, float(np.max(np.abs(wa))), float(np.max(np.abs(wb))))
    if float(wa[0]) < -pre_thr:
        raise PreconditionViolated(f"A has negative eigenvalue {wa[0]:g}")
    gap = herm_eig(bm - am).eigenvalues[0]
    if float(gap) < -pre_thr:
        raise PreconditionViolated(f"A <= B fails by {gap:g}")
    if float(wb[0]) < m - pre_thr or float(wb[-1]) > M + pre_thr:
        raise PreconditionViolated(
            f"spectrum of B [{wb[0]:g}, {wb[-1]:g}] escapes [{m:g}, {M:g}]"
        )
    factor = (M + m) ** 2 / (4.0 * M * m)
    lhs_sq = hermitian_part(am @ am)
    rhs_sq = factor * hermitian_part(bm @ bm)
    w, v = herm_eig(rhs_sq - lhs_sq)
    lam_min = float(w[0])
    lhs_norm = herm_norm(lhs_sq)
    rhs_norm = herm_norm(rhs_sq)
    thr = _threshold(tol, lhs_norm, rhs_norm)
    return CheckReport(
        check="square_order",
        lhs=lhs_norm,
        bound=rhs_norm,
        margin=lam_min,
        loewner_pass=lam_min >= -thr,
        norm_pass=lhs_norm <= rhs_norm + thr,
        tol=tol,
        witness=Witness(lam_min, v[:, 0].copy()),
        context={"m": m, "M": M},
    )


def check_fact_norm_anticommutator(a, b, tol: float = DEFAULT_TOL) -> CheckReport:
    """||AB + BA|| <= ||A^2 + B^2|| for PSD A, B."""
    am = as_herm(a)
    bm = as_herm(b)
    for name, mat in (("A", am), ("B", bm)):
        w, _ = herm_eig(mat)
        if float(w[0]) < -_threshold(tol, float(np.max(np.abs(w)))):
            raise NotPSD(f"{name} has negative eigenvalue {w[0]:g}")
    lhs = herm_norm(hermitian_part(am @ bm + bm @ am))
    rhs = herm_norm(hermitian_part(am @ am + bm @ bm))
    thr = _threshold(tol, lhs, rhs)
    return CheckReport(
        check="anticommutator_norm",
        lhs=lhs,
        bound=rhs,
        margin=rhs - lhs,
        loewner_pass=None,
        norm_pass=lhs <= rhs + thr,
        tol=tol,
    )


def check_scalar_wielandt(
    x, y, a, m: float, M: float, tol: float = DEFAULT_TOL
) -> CheckReport:
    """Classical scalar Wielandt inequality for orthogonal vectors x, y:
    |<x, Ay>|^2 <= ((M-m)/(M+m))^2 <x, Ax> <y, Ay>."""
    m, M = _check_mM(m, M)
    xv = np.asarray(x, dtype=np.complex128).reshape(-1)
    yv = np.asarray(y, dtype=np.complex128).reshape(-1)
    am = as_herm(a)
    if xv.shape != yv.shape or am.shape[0] != xv.shape[0]:
        raise PreconditionViolated("vector/matrix dimensions do not match")
    nx = float(np.linalg.norm(xv))
    ny = float(np.linalg.norm(yv))
    if abs(np.vdot(xv, yv)) > tol * max(1.0, nx * ny):
        raise PreconditionViolated("x and y are not orthogonal within tolerance")
    w, _ = herm_eig(am)
    pre_thr = _threshold(tol, float(np.max(np.abs(w))))
    if float(w[0]) < m - pre_thr or float(w[-1]) > M + pre_thr:
        raise PreconditionViolated(
            f"spectrum [{w[0]:g}, {w[-1]:g}] escapes [{m:g}, {M:g}]"
        )
    lhs = abs(np.vdot(xv, am @ yv)) ** 2
    rhs = (
        wielandt_factor(m, M)
        * float(np.vdot(xv, am @ xv).real)
        * float(np.vdot(yv, am @ yv).real)
    )
    thr = _threshold(tol, lhs, rhs)
    ok = lhs <= rhs + thr
    return CheckReport(
        check="scalar_wielandt",
        lhs=float(lhs),
        bound=float(rhs),
        margin=float(rhs - lhs),
        loewner_pass=None,
        norm_pass=ok,
        tol=tol,
        context={"m": m, "M": M},
    )


# ---------------------------------------------------------------------------
# Bound comparison and the documented tail-comparison note
# ---------------------------------------------------------------------------


@dataclass
class BoundComparison:
    m: float
    M: float
    p: float
    thm1: float
    thm2: float
    thm3: float
    tightest: str
    p_star: Optional[float]
    orderings: dict
    ok: bool

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "M": self.M,
            "p": self.p,
            "thm1": self.thm1,
            "thm2": self.thm2,
            "thm3": self.thm3,
            "tightest": self.tightest,
            "p_star": self.p_star,
            "orderings": dict(self.orderings),
            "ok": self.ok,
        }


def compare_bounds(m: float, M: float, p: float, tol: float = ORDERING_TOL) -> BoundComparison:
    """All three bounds plus the expected-region orderings: the arithmetic-mean
    bound never beats the two-branch bound; the ceiling-exponent bound loses
    for p <= 1/2, wins for 1/2 < p <= 2, and loses again past the crossover."""
    m, M = _check_mM(m, M)
    p = _check_p(p)
    b1 = bound_thm1(m, M, p)
    b2 = bound_thm2(m, M, p)
    b3 = bound_thm3(m, M, p)
    values = {"thm1": b1, "thm2": b2, "thm3": b3}
    tightest = min(values, key=lambda k: (values[k], k))
    p_star = crossover_threshold(m, M) if M > m else None
    orderings = {"thm1_ge_thm2": b1 >= b2 - _threshold(tol, b1, b2)}
    if p <= 0.5:
        orderings["thm3_ge_thm2"] = b3 >= b2 - _threshold(tol, b2, b3)
    elif p <= 2.0:
        orderings["thm3_le_thm2"] = b3 <= b2 + _threshold(tol, b2, b3)
    if p_star is not None and p > p_star:
        orderings["thm2_le_thm3"] = b2 <= b3 + _threshold(tol, b2, b3)
    return BoundComparison(
        m=m,
        M=M,
        p=p,
        thm1=b1,
        thm2=b2,
        thm3=b3,
        tightest=tightest,
        p_star=p_star,
        orderings=orderings,
        ok=all(orderings.values()),
    )


def thm2_tail_note(m: float, M: float, p_values) -> dict:
    """Flagged note: the tail comparison bound_thm2 >= ((M-m)/(M+m))^p with a
    single exponent fails whenever M < (1 + sqrt 2) m, while the doubled
    exponent ((M-m)/(M+m))^{2p} is dominated for every p."""
    m, M = _check_mM(m, M)
    ratio = (M - m) / (M + m)
    cases = []
    for p in p_values:
        p = _check_p(p)
        b2 = bound_thm2(m, M, p)
        single = ratio**p
        double = ratio ** (2.0 * p)
        cases.append(
            {
                "p": p,
                "thm2": b2,
                "single_exponent_rhs": single,
                "single_holds": b2 >= single - _threshold(ORDERING_TOL, b2, single),
                "double_exponent_rhs": double,
                "double_holds": b2 >= double - _threshold(ORDERING_TOL, b2, double),
            }
        )
    return {
        "id": "thm2_tail_comparison",
        "m": m,
        "M": M,
        "contrast_boundary": (1.0 + math.sqrt(2.0)) * m,
        "cases": cases,
        "note": (
            "The single-exponent tail comparison thm2 >= ((M-m)/(M+m))^p fails "
            "for M below (1+sqrt(2))*m; the doubled-exponent variant "
            "thm2 >= ((M-m)/(M+m))^(2p) holds for every p > 0."
        ),
    }


# ---------------------------------------------------------------------------
# Batch drivers (used by the CLI and the acceptance suite)
# ---------------------------------------------------------------------------


def run_instance_checks(inst: Instance, p_values, tol: float = DEFAULT_TOL) -> list:
    """Every per-instance check for each exponent, sharing one set of spectral
    decompositions.  Returns report objects (see module docstring for margin
    conventions)."""
    reports: list = []
    base_ctx = {"seed": inst.seed, "m": inst.m, "M": inst.M}
    s, t = compressed_products(inst)

    factor = wielandt_factor(inst.m, inst.M)
    rhs = factor * t
    w_bd, v_bd = herm_eig(rhs - s)
    s_eig = herm_eig(s)
    t_eig = herm_eig(t)
    s_norm = float(np.max(np.abs(s_eig.eigenvalues)))
    rhs_norm = factor * float(np.max(np.abs(t_eig.eigenvalues)))
    lam_min = float(w_bd[0])
    thr = _threshold(tol, s_norm, rhs_norm)
    reports.append(
        CheckReport(
            check="bhatia_davis",
            lhs=s_norm,
            bound=rhs_norm,
            margin=lam_min,
            loewner_pass=lam_min >= -thr,
            norm_pass=s_norm <= rhs_norm + thr,
            tol=tol,
            witness=Witness(lam_min, v_bd[:, 0].copy()),
            context=base_ctx,
        )
    )

    for p in p_values:
        p = _check_p(p)
        ctx = dict(base_ctx, p=p)
        g = gamma_from_products(s, t, p, inst.m, inst.M, s_eig=s_eig, t_eig=t_eig)
        _, (w, v) = _half_sym_eig(g)
        abs_norm = float(np.max(np.abs(w))) if w.size else 0.0
        gnorm = op_norm(g.gamma)
        implied = []
        for which in (1, 2, 3):
            bound = _bound_fn(which)(inst.m, inst.M, p)
            rep_abs, rep_sym = _theorem_reports_from_eigs(w, v, bound, which, tol, ctx)
            reports.extend((rep_abs, rep_sym))
            implied.append((not rep_abs.passed) or rep_sym.passed)
        reports.append(
            FlagReport(
                name="abs_implies_sym",
                passed=all(implied),
                detail=f"p={p}",
            )
        )
        reports.append(_sym_norm_report(abs_norm, gnorm, tol, ctx))
        reports.append(_gamma_bound_report(gnorm, inst.m, inst.M, p, tol, ctx))
        reports.append(chain_report(g, tol, ctx, half_sum_norm=abs_norm))
        monotone = power_monotone_report(g, tol, ctx)
        if monotone is not None:
            reports.append(monotone)
    return reports


def gen_square_order_pair(
    seed: int, dim: int, m: float, M: float
) -> tuple[np.ndarray, np.ndarray]:
    """Construct (A, B) with 0 <= A <= B and spectrum(B) in [m, M]: B is a
    random bounded operator and A = B - sP for a random PSD P scaled to keep
    A PSD."""
    m, M = _check_mM(m, M)
    b = gen_operator(mix_seed(seed, "square_b"), dim, m, M)
    rng = rng_from(mix_seed(seed, "square_p"))
    gmat = complex_gaussian(rng, dim, dim)
    psd = hermitian_part(gmat @ gmat.conj().T)
    top = float(herm_eig(psd).eigenvalues[-1])
    lo_b = float(herm_eig(b).eigenvalues[0])
    scale = 0.0 if top <= 0.0 else rng.uniform(0.0, 1.0) * lo_b / top
    a = hermitian_part(b - scale * psd)
    return a, b


def gen_psd_pair(seed: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    rng = rng_from(seed)
    g1 = complex_gaussian(rng, dim, dim)
    g2 = complex_gaussian(rng, dim, dim)
    return (
        hermitian_part(g1 @ g1.conj().T),
        hermitian_part(g2 @ g2.conj().T),
    )


def lemma_block_case(seed: int, dim: int, variant: int) -> tuple[np.ndarray, float]:
    """Random matrix plus a threshold chosen to exercise both sides of the
    boundary, including t = ||X|| +/- 1e-6."""
    rng = rng_from(seed)
    x = complex_gaussian(rng, dim, dim) / math.sqrt(dim)
    x_norm = op_norm(x)
    offsets = {
        0: x_norm + 1e-6,
        1: max(x_norm - 1e-6, 0.0),
        2: 0.5 * x_norm,
        3: 1.5 * x_norm,
    }
    return x, offsets[variant % 4]


def run_lemma_trial(
    seed: int,
    dim: int,
    ambient: int,
    m: float,
    M: float,
    tol: float = DEFAULT_TOL,
    variant: Optional[int] = None,
) -> list:
    """One round of the lemma/fact/scalar checks on freshly sampled inputs."""
    reports: list = []
    if variant is None:
        variant = mix_seed(seed, "variant") % 4
    x, t = lemma_block_case(mix_seed(seed, "lemma_block"), dim, variant)
    reports.append(check_lemma_block_equivalence(x, t, tol))

    a, b = gen_square_order_pair(mix_seed(seed, "square"), dim, m, M)
    reports.append(check_lemma_square_order(a, b, m, M, tol))

    p1, p2 = gen_psd_pair(mix_seed(seed, "psd_pair"), dim)
    reports.append(check_fact_norm_anticommutator(p1, p2, tol))

    op = gen_operator(mix_seed(seed, "wielandt_a"), ambient, m, M)
    uni = haar_unitary(rng_from(mix_seed(seed, "wielandt_xy")), ambient)
    reports.append(check_scalar_wielandt(uni[:, 0], uni[:, 1], op, m, M, tol))
    return reports
