from fractions import Fraction

import pytest

from arborify.coeff import ExactCoeff, format_coeff


def test_i_powers_cycle():
    i = ExactCoeff.i_power(1)
    assert i * i == ExactCoeff(-1)
    assert ExactCoeff.i_power(4) == ExactCoeff.one()
    assert ExactCoeff.i_power(-1) == ExactCoeff(0, -1)


def test_arithmetic_is_exact():
    a = ExactCoeff(Fraction(1, 3), 2)
    b = ExactCoeff(Fraction(2, 3), -2)
    assert a + b == ExactCoeff(1)
    assert (a - a).is_zero()
    assert a * a.conjugate() == ExactCoeff(Fraction(1, 9) + 4)


def test_mu_powers():
    m = ExactCoeff(1, 0, 1)
    assert (m * m).mu_exp == 2
    assert m.to_complex(mu=2.0) == 4
    with pytest.raises(ValueError):
        m + ExactCoeff(1)
    with pytest.raises(ValueError):
        ExactCoeff(1, 0, -1)


@pytest.mark.parametrize("c, text", [
    (ExactCoeff(Fraction(3, 2)), "3/2"),
    (ExactCoeff(0, 1), "i"),
    (ExactCoeff(0, -1), "-i"),
    (ExactCoeff(0, 2), "2i"),
    (ExactCoeff(Fraction(1, 2), 3), "(1/2+3i)"),
    (ExactCoeff(1, -1), "(1-1i)"),
    (ExactCoeff(-1, 0, 2), "-1 mu^4"),
])
def test_format(c, text):
    assert format_coeff(c) == text
