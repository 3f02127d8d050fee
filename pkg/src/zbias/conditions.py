"""Checkers for the sufficient conditions under which adjustment amplifies bias.

Each checker returns one or more ``ConditionReport`` values: a verdict, the
minimal slack (``margin``, negative exactly when violated) and a witness per
violated cell.  Monotonicity is always weak and evaluated over the declared
support order with tolerance 1e-12; model-fit residuals and positivity use
the looser validation tolerance 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import fsum

from .errors import (
    NonBinaryOutcomeError,
    NonpositiveCellError,
    PremiseViolationError,
    UndefinedConditionalError,
    ZeroDenominatorError,
)
from .estimators import EstimateSet, _mu_values
from .scenario import (
    IDENTITY_TOL,
    VALIDATION_TOL,
    BinaryScenario,
    DiscreteScenario,
    PotentialOutcomeScenario,
    _propensity_values,
)


@dataclass(frozen=True)
class Witness:
    """One violated comparison: the cell plus the two compared values."""

    cell: str
    lhs: float
    rhs: float


@dataclass(frozen=True)
class ConditionReport:
    condition_id: str
    holds: bool
    margin: float
    witnesses: tuple[Witness, ...]

    def __post_init__(self):
        object.__setattr__(self, "witnesses", tuple(self.witnesses))
        consistent = self.holds == (not self.witnesses) == (self.margin >= -IDENTITY_TOL)
        if not consistent:
            raise AssertionError(f"inconsistent report for {self.condition_id}")

    def to_json(self) -> str:
        cells = ", ".join(
            '{"cell": %s, "lhs": %s, "rhs": %s}'
            % (_json_str(w.cell), _json_num(w.lhs), _json_num(w.rhs))
            for w in self.witnesses
        )
        return (
            '{"condition_id": %s, "holds": %s, "margin": %s, "witnesses": [%s]}'
            % (_json_str(self.condition_id), "true" if self.holds else "false",
               _json_num(self.margin), cells)
        )


def _json_str(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _json_num(value: float) -> str:
    # Python's json module spells the IEEE specials this way.
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    if math.isnan(value):
        return "NaN"
    return f"{value:.17g}"


def reports_to_json(reports) -> str:
    if isinstance(reports, ConditionReport):
        reports = [reports]
    return "[" + ", ".join(r.to_json() for r in reports) + "]"


def _report(condition_id: str, checks) -> ConditionReport:
    """Build a report from (cell, lhs, rhs, slack) comparisons.

    A comparison is violated when its slack drops below -1e-12; the margin
    is the minimal slack (infinite when there is nothing to compare).
    """
    checks = list(checks)
    witnesses = tuple(
        Witness(cell, lhs, rhs) for cell, lhs, rhs, slack in checks if slack < -IDENTITY_TOL
    )
    margin = min((slack for *_rest, slack in checks), default=math.inf)
    return ConditionReport(condition_id, not witnesses, margin, witnesses)


def _nondecreasing(values, labels, cell_fmt):
    """Comparisons requiring values to be weakly increasing along labels."""
    for (v0, v1), (l0, l1) in zip(zip(values, values[1:]), zip(labels, labels[1:])):
        yield cell_fmt.format(lo=l0, hi=l1), v1, v0, v1 - v0


def _nonincreasing(values, labels, cell_fmt):
    for (v0, v1), (l0, l1) in zip(zip(values, values[1:]), zip(labels, labels[1:])):
        yield cell_fmt.format(lo=l0, hi=l1), v0, v1, v0 - v1


def _treated_prob_by_u(s: DiscreteScenario) -> list[float]:
    # Pr(A=1 | U=u), using Z independent of U.
    return [
        fsum(s.z_pmf[i] * s.treat[i][j] for i in range(s.n_z)) for j in range(s.n_u)
    ]


def _outcome_mean_by_u(s: DiscreteScenario, arm: int) -> list[float]:
    """E(Y | A=a, U=u).  Equals the table row when it is constant in z;
    otherwise averages over the conditional law of Z given (A=a, U=u)."""
    if not s.outcome_mean_depends_on_z():
        return list(s.outcome_mean[arm][0])
    values = []
    for j in range(s.n_u):
        weights = [
            s.z_pmf[i] * (s.treat[i][j] if arm == 1 else 1.0 - s.treat[i][j])
            for i in range(s.n_z)
        ]
        total = fsum(weights)
        if total <= 0.0:
            raise UndefinedConditionalError(
                f"E(Y|A={arm}, U={s.u_support[j]!r}) undefined: empty conditioning event"
            )
        values.append(
            fsum(w * s.outcome_mean[arm][i][j] for i, w in enumerate(weights)) / total
        )
    return values


def check_thm1(s: DiscreteScenario) -> list[ConditionReport]:
    """Monotone-association conditions for the scalar-instrument ordering.

    Four sub-reports: the propensity is non-decreasing in z; Pr(A=1|U=u) is
    non-decreasing in u; E(Y|A=a,U=u) is non-decreasing in u for both arms;
    and E(Y|A=a,Z=z) is non-increasing in z for both arms (checked over
    positive-mass levels, where it is defined).
    """
    pi = _propensity_values(s)
    a1 = _report("thm1.a1", _nondecreasing(pi, s.z_support, "Pr(A=1|Z): z {lo}->{hi}"))
    pau = _treated_prob_by_u(s)
    a2 = _report("thm1.a2", _nondecreasing(pau, s.u_support, "Pr(A=1|U): u {lo}->{hi}"))
    checks = []
    for arm in (0, 1):
        m_u = _outcome_mean_by_u(s, arm)
        checks.extend(
            _nondecreasing(m_u, s.u_support, f"E(Y|A={arm},U): u {{lo}}->{{hi}}")
        )
    a3 = _report("thm1.a3", checks)
    mu0, mu1, _ = _mu_values(s)
    used = [i for i in range(s.n_z) if s.z_pmf[i] > 0.0]
    checks = []
    for arm, mu in ((0, mu0), (1, mu1)):
        values = [mu[i] for i in used]
        labels = [s.z_support[i] for i in used]
        checks.extend(
            _nonincreasing(values, labels, f"E(Y|A={arm},Z): z {{lo}}->{{hi}}")
        )
    b = _report("thm1.b", checks)
    return [a1, a2, a3, b]


@dataclass(frozen=True)
class AdditiveDecomposition:
    """treat(z,u) ~ z_effect(z) + u_effect(u), normalised so E[u_effect(U)] = 0."""

    z_levels: tuple[float, ...]
    z_effect: tuple[float, ...]
    u_levels: tuple[float, ...]
    u_effect: tuple[float, ...]
    residual_max: float


@dataclass(frozen=True)
class MultiplicativeDecomposition:
    """treat(z,u) ~ z_effect(z) * u_effect(u), normalised so E[u_effect(U)] = 1."""

    z_levels: tuple[float, ...]
    z_effect: tuple[float, ...]
    u_levels: tuple[float, ...]
    u_effect: tuple[float, ...]
    residual_max: float


def fit_additive(s: DiscreteScenario) -> AdditiveDecomposition:
    """Best additive decomposition of the treatment table.

    The z part is the propensity and the u part is Pr(A=1|U=u) - Pr(A=1);
    when the table is exactly additive the residual is zero.
    """
    pi = _propensity_values(s)
    f = fsum(s.z_pmf[i] * pi[i] for i in range(s.n_z))
    gamma = [p - f for p in _treated_prob_by_u(s)]
    residual = max(
        abs(s.treat[i][j] - pi[i] - gamma[j])
        for i in range(s.n_z)
        for j in range(s.n_u)
    )
    return AdditiveDecomposition(
        z_levels=s.z_support,
        z_effect=tuple(pi),
        u_levels=s.u_support,
        u_effect=tuple(gamma),
        residual_max=residual,
    )


def fit_multiplicative(s: DiscreteScenario) -> MultiplicativeDecomposition:
    """Best multiplicative decomposition; requires a strictly positive table."""
    for i in range(s.n_z):
        for j in range(s.n_u):
            if s.treat[i][j] <= 0.0:
                raise NonpositiveCellError(
                    f"treat[{i}][{j}] = {s.treat[i][j]!r}: multiplicative fit "
                    "needs strictly positive cells"
                )
    pi = _propensity_values(s)
    f = fsum(s.z_pmf[i] * pi[i] for i in range(s.n_z))
    gamma = [p / f for p in _treated_prob_by_u(s)]
    residual = max(
        abs(s.treat[i][j] - pi[i] * gamma[j])
        for i in range(s.n_z)
        for j in range(s.n_u)
    )
    return MultiplicativeDecomposition(
        z_levels=s.z_support,
        z_effect=tuple(pi),
        u_levels=s.u_support,
        u_effect=tuple(gamma),
        residual_max=residual,
    )


def _monotone_effect_checks(s: DiscreteScenario, dec) -> list:
    checks = list(
        _nondecreasing(dec.z_effect, dec.z_levels, "z effect: z {lo}->{hi}")
    )
    checks.extend(
        _nondecreasing(dec.u_effect, dec.u_levels, "u effect: u {lo}->{hi}")
    )
    for arm in (0, 1):
        m_u = _outcome_mean_by_u(s, arm)
        checks.extend(
            _nondecreasing(m_u, s.u_support, f"E(Y|A={arm},U): u {{lo}}->{{hi}}")
        )
    return checks


def _top_support_mass_checks(s: DiscreteScenario):
    """Finite-support essential-supremum condition: the top confounder level
    keeps positive conditional mass given (A=a, Z=z) at every positive-mass
    instrument level."""
    pi = _propensity_values(s)
    top = s.n_u - 1
    for i in range(s.n_z):
        if s.z_pmf[i] == 0.0:
            continue
        for arm in (0, 1):
            num = s.u_pmf[top] * (s.treat[i][top] if arm == 1 else 1.0 - s.treat[i][top])
            den = pi[i] if arm == 1 else 1.0 - pi[i]
            if den <= 0.0:
                raise UndefinedConditionalError(
                    f"Pr(U|A={arm}, Z={s.z_support[i]!r}) undefined: empty arm"
                )
            mass = num / den
            cell = f"Pr(U={s.u_support[top]!r}|A={arm},Z={s.z_support[i]!r})"
            yield cell, mass, VALIDATION_TOL, mass - VALIDATION_TOL


def check_thm2(s: DiscreteScenario) -> list[ConditionReport]:
    """Additive-model sufficient conditions: exact additive treatment table,
    monotone effect pieces, and the top-level mass condition."""
    dec = fit_additive(s)
    fit = _report(
        "thm2.a",
        [("max |treat - (z_effect + u_effect)|", dec.residual_max, VALIDATION_TOL,
          VALIDATION_TOL - dec.residual_max)],
    )
    mono = _report("thm2.b", _monotone_effect_checks(s, dec))
    ess = _report("thm2.c", _top_support_mass_checks(s))
    return [fit, mono, ess]


def check_thm3(s: DiscreteScenario) -> list[ConditionReport]:
    """Multiplicative-model sufficient conditions."""
    dec = fit_multiplicative(s)
    fit = _report(
        "thm3.a'",
        [("max |treat - z_effect * u_effect|", dec.residual_max, VALIDATION_TOL,
          VALIDATION_TOL - dec.residual_max)],
    )
    mono = _report("thm3.b", _monotone_effect_checks(s, dec))
    ess = _report("thm3.c", _top_support_mass_checks(s))
    return [fit, mono, ess]


def _binary_cells(s: BinaryScenario) -> tuple[float, float, float, float]:
    # (p11, p10, p01, p00) with z as the first index.
    return s.treat[1][1], s.treat[1][0], s.treat[0][1], s.treat[0][0]


def check_weaker_condition(s: BinaryScenario) -> ConditionReport:
    """Non-positive multiplicative interaction on both treatment presence and
    absence: p11*p00/(p10*p01) <= 1 and (1-p11)(1-p00)/((1-p10)(1-p01)) <= 1.

    A zero numerator passes vacuously; a zero denominator under a positive
    numerator raises, naming the zero cell.
    """
    p11, p10, p01, p00 = _binary_cells(s)
    pieces = (
        ("presence", p11 * p00, p10 * p01, (("p10", p10), ("p01", p01))),
        ("absence", (1 - p11) * (1 - p00), (1 - p10) * (1 - p01),
         (("1-p10", 1 - p10), ("1-p01", 1 - p01))),
    )
    checks = []
    for tag, num, den, factors in pieces:
        if num == 0.0:
            checks.append((f"{tag} ratio", 0.0, 1.0, 1.0))
            continue
        if den == 0.0:
            zero = next(name for name, value in factors if value == 0.0)
            raise ZeroDenominatorError(f"{tag} ratio undefined: {zero} = 0")
        ratio = num / den
        checks.append((f"{tag} ratio", ratio, 1.0, 1.0 - ratio))
    return _report("weaker_condition", checks)


def _monotone_treatment_checks(p11, p10, p01, p00):
    return [
        ("p11 >= p10", p11, p10, p11 - p10),
        ("p11 >= p01", p11, p01, p11 - p01),
        ("p10 >= p00", p10, p00, p10 - p00),
        ("p01 >= p00", p01, p00, p01 - p00),
    ]


def _outcome_monotone_checks(s: BinaryScenario):
    return [
        (f"r{a}1 >= r{a}0", s.outcome_mean[a][1], s.outcome_mean[a][0],
         s.outcome_mean[a][1] - s.outcome_mean[a][0])
        for a in (0, 1)
    ]


def check_cor1(s: BinaryScenario) -> list[ConditionReport]:
    """Binary-case additive conditions: zero additive interaction, monotone
    treatment effects, monotone outcome means in u."""
    p11, p10, p01, p00 = _binary_cells(s)
    contrast = p11 - p10 - p01 + p00
    a = _report(
        "cor1.a", [("p11 - p10 - p01 + p00", contrast, 0.0, -abs(contrast))]
    )
    b = _report("cor1.b", _monotone_treatment_checks(p11, p10, p01, p00))
    c = _report("cor1.c", _outcome_monotone_checks(s))
    return [a, b, c]


def check_cor2(s: BinaryScenario) -> list[ConditionReport]:
    """Binary-case multiplicative conditions: unit cross-product ratio plus
    the same monotonicity as the additive case."""
    p11, p10, p01, p00 = _binary_cells(s)
    gap = p11 * p00 - p10 * p01
    a = _report("cor2.a'", [("p11*p00 - p10*p01", gap, 0.0, -abs(gap))])
    b = _report("cor2.b", _monotone_treatment_checks(p11, p10, p01, p00))
    c = _report("cor2.c", _outcome_monotone_checks(s))
    return [a, b, c]


def check_collider_association(s: DiscreteScenario, arm: int) -> list[ConditionReport]:
    """Direction of the association induced between Z and U by conditioning
    on the treatment: F(u | A=a, Z=z) must be non-decreasing in z at every u.

    For an exactly multiplicative treatment table and arm 1, additionally
    checks that Z and U are conditionally independent (the conditional
    distribution of U does not move with z at all).
    """
    if arm not in (0, 1):
        raise PremiseViolationError(f"arm must be 0 or 1, got {arm!r}")
    used = [i for i in range(s.n_z) if s.z_pmf[i] > 0.0]
    cdfs = []
    for i in used:
        weights = [
            s.u_pmf[j] * (s.treat[i][j] if arm == 1 else 1.0 - s.treat[i][j])
            for j in range(s.n_u)
        ]
        total = fsum(weights)
        if total <= 0.0:
            raise UndefinedConditionalError(
                f"Pr(U|A={arm}, Z={s.z_support[i]!r}) undefined: empty conditioning event"
            )
        running = 0.0
        cdf = []
        for w in weights:
            running += w / total
            cdf.append(min(running, 1.0))
        cdfs.append(cdf)

    checks = []
    for j in range(s.n_u):
        values = [cdf[j] for cdf in cdfs]
        labels = [s.z_support[i] for i in used]
        checks.extend(
            _nondecreasing(
                values, labels, f"F(u={s.u_support[j]!r}|A={arm},Z): z {{lo}}->{{hi}}"
            )
        )
    reports = [_report(f"collider.a{arm}.monotone", checks)]

    multiplicative = all(
        s.treat[i][j] > 0.0 for i in range(s.n_z) for j in range(s.n_u)
    ) and fit_multiplicative(s).residual_max <= VALIDATION_TOL
    if arm == 1 and multiplicative:
        checks = []
        for j in range(s.n_u):
            base = cdfs[0][j]
            for pos, i in enumerate(used):
                gap = cdfs[pos][j] - base
                checks.append(
                    (
                        f"F(u={s.u_support[j]!r}|A=1,Z={s.z_support[i]!r})",
                        cdfs[pos][j],
                        base,
                        -abs(gap),
                    )
                )
        reports.append(_report("collider.a1.indep", checks))
    return reports


def _require_monotone_quadruple(p11, p10, p01, p00, lemma: str) -> None:
    if not (
        p11 >= max(p10, p01) - VALIDATION_TOL
        and min(p10, p01) >= p00 - VALIDATION_TOL
    ):
        raise PremiseViolationError(
            f"{lemma} premises need p11 >= max(p10, p01) and min(p10, p01) >= p00"
        )
    if not p00 > 0.0:
        raise PremiseViolationError(f"{lemma} premises need p00 > 0")


def check_lemma_s5(p11: float, p10: float, p01: float, p00: float) -> ConditionReport:
    """Conclusions of the no-additive-interaction lemma: under monotonicity
    and zero additive contrast, both cross-product ratios are at most 1."""
    _require_monotone_quadruple(p11, p10, p01, p00, "lemma_s5")
    contrast = p11 - p10 - p01 + p00
    if abs(contrast) > VALIDATION_TOL:
        raise PremiseViolationError(
            f"lemma_s5 premises need zero additive interaction, got {contrast!r}"
        )
    checks = []
    for tag, num, den in (
        ("presence", p11 * p00, p10 * p01),
        ("absence", (1 - p11) * (1 - p00), (1 - p10) * (1 - p01)),
    ):
        if num == 0.0:
            checks.append((f"{tag} ratio", 0.0, 1.0, 1.0))
        else:
            ratio = num / den
            checks.append((f"{tag} ratio", ratio, 1.0, 1.0 - ratio))
    return _report("lemma_s5", checks)


def check_lemma_s7(p11: float, p10: float, p01: float, p00: float) -> ConditionReport:
    """Conclusions of the no-multiplicative-interaction lemma: nonnegative
    additive contrast and absence ratio at most 1."""
    _require_monotone_quadruple(p11, p10, p01, p00, "lemma_s7")
    gap = p11 * p00 - p10 * p01
    if abs(gap) > VALIDATION_TOL:
        raise PremiseViolationError(
            f"lemma_s7 premises need p11*p00 = p10*p01, got gap {gap!r}"
        )
    contrast = p11 - p10 - p01 + p00
    checks = [("p11 - p10 - p01 + p00", contrast, 0.0, contrast)]
    num = (1 - p11) * (1 - p00)
    den = (1 - p10) * (1 - p01)
    if num == 0.0:
        checks.append(("absence ratio", 0.0, 1.0, 1.0))
    else:
        ratio = num / den
        checks.append(("absence ratio", ratio, 1.0, 1.0 - ratio))
    return _report("lemma_s7", checks)


def _selection_by_potential(s: PotentialOutcomeScenario, arm: int):
    """Pr(A=1 | Y(arm) = y) over the distinct values of that potential outcome."""
    totals: dict[float, float] = {}
    nums: dict[float, float] = {}
    for j, (y1, y0) in enumerate(s.y_pairs):
        value = y1 if arm == 1 else y0
        mass = s.pair_pmf[j]
        selected = fsum(
            s.pi_pmf[k] * s.pair_pmf[j] * s.treat[k][j] for k in range(s.n_pi)
        )
        totals[value] = totals.get(value, 0.0) + mass
        nums[value] = nums.get(value, 0.0) + selected
    levels = sorted(v for v, mass in totals.items() if mass > 0.0)
    return levels, [nums[v] / totals[v] for v in levels]


def _nu_by_pi(s: PotentialOutcomeScenario, arm: int):
    """nu_a(pi) = E(Y | A=a, pi) over positive-mass propensity levels."""
    levels = []
    values = []
    for k in range(s.n_pi):
        if s.pi_pmf[k] == 0.0:
            continue
        if arm == 1:
            den = fsum(p * t for p, t in zip(s.pair_pmf, s.treat[k]))
            num = fsum(
                p * t * y1 for (y1, _y0), p, t in zip(s.y_pairs, s.pair_pmf, s.treat[k])
            )
        else:
            den = fsum(p * (1.0 - t) for p, t in zip(s.pair_pmf, s.treat[k]))
            num = fsum(
                p * (1.0 - t) * y0
                for (_y1, y0), p, t in zip(s.y_pairs, s.pair_pmf, s.treat[k])
            )
        if den <= 0.0:
            raise UndefinedConditionalError(
                f"E(Y|A={arm}, pi={s.pi_support[k]!r}) undefined: empty arm"
            )
        levels.append(s.pi_support[k])
        values.append(num / den)
    return levels, values


def check_thm4(s: PotentialOutcomeScenario) -> list[ConditionReport]:
    """General-confounder ordering conditions: selection is monotone in each
    potential outcome, and the propensity is non-positively associated with
    the within-arm outcome means."""
    checks = []
    for arm in (0, 1):
        levels, probs = _selection_by_potential(s, arm)
        checks.extend(
            _nondecreasing(probs, levels, f"Pr(A=1|Y({arm})): y {{lo}}->{{hi}}")
        )
    a = _report("thm4.a", checks)
    checks = []
    for arm in (0, 1):
        levels, values = _nu_by_pi(s, arm)
        weights = [p for p in s.pi_pmf if p > 0.0]
        e_pi = fsum(w * lv for w, lv in zip(weights, levels))
        e_nu = fsum(w * v for w, v in zip(weights, values))
        cov = fsum(w * lv * v for w, lv, v in zip(weights, levels, values)) - e_pi * e_nu
        checks.append((f"cov(pi, E(Y|A={arm},pi))", -cov, 0.0, -cov))
    b = _report("thm4.b", checks)
    return [a, b]


@dataclass(frozen=True)
class Cor3Model:
    """Saturated binary selection model
    Pr(A=1|pi,y1,y0) = alpha + pi + delta*y1 + eta*y0 + theta*y1*y0,
    fitted exactly from the four outcome cells at each propensity level.
    ``residual_max`` is the largest spread of a coefficient across levels."""

    alpha: float
    delta: float
    eta: float
    theta: float
    residual_max: float


@dataclass(frozen=True)
class Cor4Model:
    """Multiplicative analogue
    Pr(A=1|pi,y1,y0) = alpha * pi * delta^y1 * eta^y0 * theta^(y1*y0)."""

    alpha: float
    delta: float
    eta: float
    theta: float
    residual_max: float


def _binary_pair_index(s: PotentialOutcomeScenario) -> dict[tuple[float, float], int]:
    values = {v for pair in s.y_pairs for v in pair}
    if not values <= {0.0, 1.0}:
        raise NonBinaryOutcomeError(
            f"potential outcomes must take values in {{0, 1}}, got {sorted(values)}"
        )
    index = {pair: j for j, pair in enumerate(s.y_pairs)}
    missing = [
        pair
        for pair in ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0))
        if pair not in index
    ]
    if missing:
        raise NonBinaryOutcomeError(
            f"binary selection model needs all four outcome pairs declared; "
            f"missing {missing}"
        )
    return index


def fit_cor3_model(s: PotentialOutcomeScenario) -> Cor3Model:
    index = _binary_pair_index(s)
    alphas, deltas, etas, thetas = [], [], [], []
    for k in range(s.n_pi):
        t = {pair: s.treat[k][j] for pair, j in index.items()}
        base = t[(0.0, 0.0)]
        alphas.append(base - s.pi_support[k])
        deltas.append(t[(1.0, 0.0)] - base)
        etas.append(t[(0.0, 1.0)] - base)
        thetas.append(t[(1.0, 1.0)] - t[(1.0, 0.0)] - t[(0.0, 1.0)] + base)
    residual = max(max(c) - min(c) for c in (alphas, deltas, etas, thetas))

    def mean(coeffs):
        return fsum(w * c for w, c in zip(s.pi_pmf, coeffs))

    return Cor3Model(mean(alphas), mean(deltas), mean(etas), mean(thetas), residual)


def fit_cor4_model(s: PotentialOutcomeScenario) -> Cor4Model:
    index = _binary_pair_index(s)
    for pair, j in index.items():
        for k in range(s.n_pi):
            if s.treat[k][j] <= 0.0:
                raise NonpositiveCellError(
                    f"treat[{k}][{j}] = {s.treat[k][j]!r}: multiplicative model "
                    "needs strictly positive cells"
                )
    if any(pi <= 0.0 for pi in s.pi_support):
        raise NonpositiveCellError("multiplicative model needs pi > 0 at every level")
    alphas, deltas, etas, thetas = [], [], [], []
    for k in range(s.n_pi):
        t = {pair: s.treat[k][j] for pair, j in index.items()}
        base = t[(0.0, 0.0)]
        alphas.append(base / s.pi_support[k])
        deltas.append(t[(1.0, 0.0)] / base)
        etas.append(t[(0.0, 1.0)] / base)
        thetas.append(t[(1.0, 1.0)] * base / (t[(1.0, 0.0)] * t[(0.0, 1.0)]))
    residual = max(max(c) - min(c) for c in (alphas, deltas, etas, thetas))

    def mean(coeffs):
        return fsum(w * c for w, c in zip(s.pi_pmf, coeffs))

    return Cor4Model(mean(alphas), mean(deltas), mean(etas), mean(thetas), residual)


def outcome_odds_ratio(s: PotentialOutcomeScenario) -> float:
    """Odds ratio of the joint binary potential-outcome law; infinite when
    only the diagonal carries mass, NaN when degenerate in both factors."""
    index = _binary_pair_index(s)
    p11 = s.pair_pmf[index[(1.0, 1.0)]]
    p00 = s.pair_pmf[index[(0.0, 0.0)]]
    p10 = s.pair_pmf[index[(1.0, 0.0)]]
    p01 = s.pair_pmf[index[(0.0, 1.0)]]
    num = p11 * p00
    den = p10 * p01
    if den == 0.0:
        return math.nan if num == 0.0 else math.inf
    return num / den


def _odds_ratio_checks(s: PotentialOutcomeScenario):
    ratio = outcome_odds_ratio(s)
    if math.isnan(ratio):
        # Degenerate joint: association is vacuous.
        return [("outcome odds ratio", 1.0, 1.0, 0.0)]
    if math.isinf(ratio):
        return [("outcome odds ratio", ratio, 1.0, math.inf)]
    return [("outcome odds ratio", ratio, 1.0, ratio - 1.0)]


def check_cor3(s: PotentialOutcomeScenario) -> list[ConditionReport]:
    """Binary-outcome additive selection model with nonnegative coefficients,
    plus nonnegative association between the potential outcomes."""
    model = fit_cor3_model(s)
    a = _report(
        "cor3.a",
        [
            ("coefficient spread across pi", model.residual_max, VALIDATION_TOL,
             VALIDATION_TOL - model.residual_max),
            ("delta", model.delta, 0.0, model.delta),
            ("eta", model.eta, 0.0, model.eta),
            ("theta", model.theta, 0.0, model.theta),
        ],
    )
    b = _report("cor3.b", _odds_ratio_checks(s))
    return [a, b]


def check_cor4(s: PotentialOutcomeScenario) -> list[ConditionReport]:
    """Binary-outcome multiplicative selection model with coefficients at
    least 1, plus nonnegative outcome association."""
    model = fit_cor4_model(s)
    a = _report(
        "cor4.a'",
        [
            ("coefficient spread across pi", model.residual_max, VALIDATION_TOL,
             VALIDATION_TOL - model.residual_max),
            ("delta", model.delta, 1.0, model.delta - 1.0),
            ("eta", model.eta, 1.0, model.eta - 1.0),
            ("theta", model.theta, 1.0, model.theta - 1.0),
        ],
    )
    b = _report("cor4.b", _odds_ratio_checks(s))
    return [a, b]


def check_thm5_binary(s: PotentialOutcomeScenario) -> list[ConditionReport]:
    """Binary-outcome reading of the interaction-free additive selection
    model: the saturated fit must have no interaction term, nonnegative main
    effects, nonnegative outcome association, and a top outcome level whose
    conditional mass never vanishes (the finite essential-supremum analogue)."""
    model = fit_cor3_model(s)
    a = _report(
        "thm5b.a",
        [
            ("coefficient spread across pi", model.residual_max, VALIDATION_TOL,
             VALIDATION_TOL - model.residual_max),
            ("delta", model.delta, 0.0, model.delta),
            ("eta", model.eta, 0.0, model.eta),
            ("theta = 0", model.theta, 0.0, VALIDATION_TOL - abs(model.theta)),
        ],
    )
    b = _report("thm5b.b", _odds_ratio_checks(s))
    index = _binary_pair_index(s)
    checks = []
    for given_arm, other_arm in ((1, 0), (0, 1)):
        sups = []
        for value in (0.0, 1.0):
            mass = fsum(
                s.pair_pmf[j]
                for pair, j in index.items()
                if pair[1 - given_arm] == value
            )
            if mass <= 0.0:
                continue
            top_mass = fsum(
                s.pair_pmf[j]
                for pair, j in index.items()
                if pair[1 - given_arm] == value and pair[1 - other_arm] == 1.0
            )
            sups.append((value, 1.0 if top_mass > 0.0 else 0.0))
        for (v0, s0), (v1, s1) in zip(sups, sups[1:]):
            checks.append(
                (
                    f"esssup Y({other_arm}) | Y({given_arm}): {v0} vs {v1}",
                    s1,
                    s0,
                    -abs(s1 - s0),
                )
            )
    c = _report("thm5b.c", checks)
    return [a, b, c]


def check_thm7(s: DiscreteScenario) -> list[ConditionReport]:
    """Conditions allowing a direct instrument-to-outcome effect: treatment
    and outcome tables monotone in both coordinates, and the within-arm
    outcome-by-instrument means still non-increasing."""
    checks = []
    for j in range(s.n_u):
        values = [s.treat[i][j] for i in range(s.n_z)]
        checks.extend(
            _nondecreasing(values, s.z_support,
                           f"treat(., u={s.u_support[j]!r}): z {{lo}}->{{hi}}")
        )
    for i in range(s.n_z):
        checks.extend(
            _nondecreasing(s.treat[i], s.u_support,
                           f"treat(z={s.z_support[i]!r}, .): u {{lo}}->{{hi}}")
        )
    treat_mono = _report("thm7.a.treat", checks)

    checks = []
    for arm in (0, 1):
        for j in range(s.n_u):
            values = [s.outcome_mean[arm][i][j] for i in range(s.n_z)]
            checks.extend(
                _nondecreasing(values, s.z_support,
                               f"E(Y|A={arm}, ., u={s.u_support[j]!r}): z {{lo}}->{{hi}}")
            )
        for i in range(s.n_z):
            checks.extend(
                _nondecreasing(s.outcome_mean[arm][i], s.u_support,
                               f"E(Y|A={arm}, z={s.z_support[i]!r}, .): u {{lo}}->{{hi}}")
            )
    mean_mono = _report("thm7.a.mean", checks)

    mu0, mu1, _ = _mu_values(s)
    used = [i for i in range(s.n_z) if s.z_pmf[i] > 0.0]
    checks = []
    for arm, mu in ((0, mu0), (1, mu1)):
        values = [mu[i] for i in used]
        labels = [s.z_support[i] for i in used]
        checks.extend(
            _nonincreasing(values, labels, f"E(Y|A={arm},Z): z {{lo}}->{{hi}}")
        )
    b = _report("thm7.b", checks)
    return [treat_mono, mean_mono, b]


@dataclass(frozen=True)
class SlotOrdering:
    """Ordering facts for one population slot."""

    slot: str
    signed_ordering: bool       # adjusted >= unadjusted >= true, weakly
    amplification: bool         # |adjusted - true| >= |unadjusted - true|, weakly
    ordering_margin: float
    amplification_margin: float


@dataclass(frozen=True)
class ZbiasVerdict:
    """Bias-amplification verdict for an estimate set.

    ``zbias`` is the headline call: strictly larger adjusted bias on the
    whole population.  Exact ties (within 1e-12) are flagged and count as no
    amplification.
    """

    slots: tuple[SlotOrdering, ...]
    zbias: bool
    tie: bool

    @property
    def label(self) -> str:
        return "YES" if self.zbias else "NO"

    def to_json(self) -> str:
        slots = ", ".join(
            '{"slot": "%s", "signed_ordering": %s, "amplification": %s, '
            '"ordering_margin": %s, "amplification_margin": %s}'
            % (
                slot.slot,
                "true" if slot.signed_ordering else "false",
                "true" if slot.amplification else "false",
                _json_num(slot.ordering_margin),
                _json_num(slot.amplification_margin),
            )
            for slot in self.slots
        )
        return '{"zbias": %s, "tie": %s, "slots": [%s]}' % (
            "true" if self.zbias else "false",
            "true" if self.tie else "false",
            slots,
        )


def zbias_verdict(e: EstimateSet) -> ZbiasVerdict:
    """Judge amplification: per-slot orderings plus the strict whole-population call."""
    slots = []
    for name, adj, true in (
        ("treated", e.adj_treated, e.true_treated),
        ("control", e.adj_control, e.true_control),
        ("all", e.adj_all, e.true_all),
    ):
        ordering_margin = min(adj - e.unadj, e.unadj - true)
        amp_margin = abs(adj - true) - abs(e.unadj - true)
        slots.append(
            SlotOrdering(
                slot=name,
                signed_ordering=ordering_margin >= -IDENTITY_TOL,
                amplification=amp_margin >= -IDENTITY_TOL,
                ordering_margin=ordering_margin,
                amplification_margin=amp_margin,
            )
        )
    gap = abs(e.adj_all - e.true_all) - abs(e.unadj - e.true_all)
    return ZbiasVerdict(
        slots=tuple(slots),
        zbias=gap > IDENTITY_TOL,
        tie=abs(gap) <= IDENTITY_TOL,
    )
