"""Scenario file format: parsing, validation errors, round trips."""

import numpy as np
import pytest

from conftest import random_binary, worked_case
from zbias import (
    BinaryScenario,
    CovariateFamily,
    DiscreteScenario,
    InvariantViolation,
    PotentialOutcomeScenario,
    ScenarioFormatError,
    parse_scenario,
    serialize_scenario,
    to_discrete,
)

CASE1_TEXT = """\
# worked example, all ten probabilities
kind = binary
pZ = 0.5
pU = 0.5
p11 = 0.8
p10 = 0.6
p01 = 0.2
p00 = 0.1
r11 = 0.08
r10 = 0.06
r01 = 0.02
r00 = 0.01
"""

DISCRETE_TEXT = """\
kind = discrete
z_support = 0, 1
z_pmf = 0.5, 0.5
u_support = 0, 1
u_pmf = 0.4, 0.6
treat[0][0] = 0.1
treat[0][1] = 0.2
treat[1][0] = 0.6
treat[1][1] = 0.8
mean[0][0][0] = 0.01
mean[0][0][1] = 0.02
mean[0][1][0] = 0.01
mean[0][1][1] = 0.02
mean[1][0][0] = 0.06
mean[1][0][1] = 0.08
mean[1][1][0] = 0.06
mean[1][1][1] = 0.08
law[0][0] = 0:0.99, 1:0.01
law[0][1] = 0:0.98, 1:0.02
law[1][0] = 0:0.94, 1:0.06
law[1][1] = 0:0.92, 1:0.08
binary_outcome = true
"""

PO_TEXT = """\
kind = potential_outcomes
pi_support = 0.3, 0.7
pi_pmf = 0.5, 0.5
y_pairs = 0,0:0.4; 0,1:0.1; 1,0:0.1; 1,1:0.4
treat[0][0] = 0.2
treat[0][1] = 0.3
treat[0][2] = 0.3
treat[0][3] = 0.4
treat[1][0] = 0.6
treat[1][1] = 0.7
treat[1][2] = 0.7
treat[1][3] = 0.8
"""

FAMILY_TEXT = """\
kind = covariate_family
begin stratum young 0.3
  z_support = 0, 1
  z_pmf = 0.5, 0.5
  u_support = 0, 1
  u_pmf = 0.5, 0.5
  treat[0][0] = 0.1
  treat[0][1] = 0.2
  treat[1][0] = 0.6
  treat[1][1] = 0.8
  mean[0][0][0] = 0.01
  mean[0][0][1] = 0.02
  mean[0][1][0] = 0.01
  mean[0][1][1] = 0.02
  mean[1][0][0] = 0.06
  mean[1][0][1] = 0.08
  mean[1][1][0] = 0.06
  mean[1][1][1] = 0.08
end stratum
begin stratum old 0.7
  z_support = 0, 1
  z_pmf = 0.4, 0.6
  u_support = 0, 1
  u_pmf = 0.5, 0.5
  treat[0][0] = 0.1
  treat[0][1] = 0.3
  treat[1][0] = 0.2
  treat[1][1] = 0.3
  mean[0][0][0] = 0.01
  mean[0][0][1] = 0.03
  mean[0][1][0] = 0.01
  mean[0][1][1] = 0.03
  mean[1][0][0] = 0.02
  mean[1][0][1] = 0.03
  mean[1][1][0] = 0.02
  mean[1][1][1] = 0.03
end stratum
"""


def test_parse_binary_worked_case():
    s = parse_scenario(CASE1_TEXT)
    assert isinstance(s, BinaryScenario)
    assert s == worked_case("case1")
    assert s.binary_outcome


def test_parse_discrete():
    s = parse_scenario(DISCRETE_TEXT)
    assert isinstance(s, DiscreteScenario)
    assert s.treat[1][1] == 0.8
    assert s.outcome_law is not None
    assert s.binary_outcome


def test_parse_potential_outcomes():
    s = parse_scenario(PO_TEXT)
    assert isinstance(s, PotentialOutcomeScenario)
    assert s.y_pairs == ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0))
    assert s.treat[1][3] == 0.8


def test_parse_family():
    s = parse_scenario(FAMILY_TEXT)
    assert isinstance(s, CovariateFamily)
    assert [st.label for st in s.strata] == ["young", "old"]
    assert s.strata[0].weight == 0.3


def test_unknown_kind():
    with pytest.raises(ScenarioFormatError, match="unknown kind"):
        parse_scenario("kind = banana\n")


def test_missing_kind():
    with pytest.raises(ScenarioFormatError, match="kind"):
        parse_scenario("pZ = 0.5\n")


def test_syntax_error_reports_line():
    bad = CASE1_TEXT.replace("p01 = 0.2", "p01 0.2")
    with pytest.raises(ScenarioFormatError, match="line 7"):
        parse_scenario(bad)


def test_duplicate_key_rejected():
    bad = CASE1_TEXT + "pZ = 0.6\n"
    with pytest.raises(ScenarioFormatError, match="duplicate key 'pZ'"):
        parse_scenario(bad)


def test_unknown_key_rejected():
    bad = CASE1_TEXT + "shoe_size = 44\n"
    with pytest.raises(ScenarioFormatError, match="unknown key 'shoe_size'"):
        parse_scenario(bad)


def test_out_of_range_probability_names_field():
    bad = CASE1_TEXT.replace("p11 = 0.8", "p11 = 1.2")
    with pytest.raises(InvariantViolation, match="p11"):
        parse_scenario(bad)


def test_po_consistency_violation_cites_constraint():
    bad = PO_TEXT.replace("treat[0][0] = 0.2", "treat[0][0] = 0.9")
    with pytest.raises(InvariantViolation, match="Pr\\(A=1\\|pi\\)=pi"):
        parse_scenario(bad)


def test_missing_treat_cell():
    bad = "\n".join(
        line for line in DISCRETE_TEXT.splitlines() if not line.startswith("treat[1][1]")
    )
    with pytest.raises(ScenarioFormatError, match="treat\\[1\\]\\[1\\]"):
        parse_scenario(bad)


def test_incomplete_law_rejected():
    bad = "\n".join(
        line for line in DISCRETE_TEXT.splitlines() if not line.startswith("law[0][1]")
    )
    with pytest.raises(ScenarioFormatError, match="law\\[0\\]\\[1\\]"):
        parse_scenario(bad)


def test_unterminated_stratum():
    bad = FAMILY_TEXT.rsplit("end stratum", 1)[0]
    with pytest.raises(ScenarioFormatError, match="unterminated"):
        parse_scenario(bad)


def test_comments_and_blank_lines_ignored():
    text = "\n\n# header\nkind = binary  # trailing\n" + CASE1_TEXT.split("\n", 2)[2]
    s = parse_scenario(text)
    assert isinstance(s, BinaryScenario)


@pytest.mark.parametrize(
    "text", [CASE1_TEXT, DISCRETE_TEXT, PO_TEXT, FAMILY_TEXT], ids=["binary", "discrete", "po", "family"]
)
def test_round_trip_exact(text):
    scenario = parse_scenario(text)
    again = parse_scenario(serialize_scenario(scenario))
    assert again == scenario


def test_round_trip_random_binary_fields_exact():
    rng = np.random.default_rng(11)
    for _ in range(100):
        s = random_binary(rng)
        assert parse_scenario(serialize_scenario(s)) == s


def test_round_trip_discrete_with_law():
    s = to_discrete(worked_case("case2"))
    assert parse_scenario(serialize_scenario(s)) == s


def test_round_trip_three_valued_law():
    law = (
        (((0.0, 0.5), (1.5, 0.3), (2.0, 0.2)), ((0.0, 0.3), (1.5, 0.4), (2.0, 0.3))),
        (((0.0, 0.2), (1.5, 0.5), (2.0, 0.3)), ((0.0, 0.1), (1.5, 0.4), (2.0, 0.5))),
    )
    means = tuple(
        tuple(
            tuple(sum(v * p for v, p in law[a][j]) for j in (0, 1)) for _ in (0, 1)
        )
        for a in (0, 1)
    )
    s = DiscreteScenario(
        z_support=(0.0, 1.0),
        z_pmf=(0.5, 0.5),
        u_support=(0.0, 1.0),
        u_pmf=(0.4, 0.6),
        treat=((0.2, 0.4), (0.5, 0.7)),
        outcome_mean=means,
        outcome_law=law,
    )
    assert parse_scenario(serialize_scenario(s)) == s
