import numpy as np
import pytest

from pemsim.core import (AnisotropicModuli, ModelParams, ParameterError,
                         lame_star, mixture_fields, validate_params)


def make_params(**overrides):
    return ModelParams.reference(**overrides)


class TestValidation:
    def test_reference_set_accepted(self):
        p = make_params()
        assert p.k == 1.0 and p.R0 == 2.0

    def test_all_restrictions_reported_at_once(self):
        with pytest.raises(ParameterError) as err:
            make_params(k=-1.0, D=0.0, S_sieve=1.5)
        msg = str(err.value)
        assert "k must be > 0" in msg
        assert "D must be > 0" in msg
        assert "S_sieve" in msg

    @pytest.mark.parametrize("field,value,fragment", [
        ("k", 0.0, "k must be > 0"),
        ("D", -2.0, "D must be > 0"),
        ("rho_f0", 0.0, "rho_f0 must be > 0"),
        ("S_sieve", 1.0, "0 < S < 1"),
        ("S_sieve", 0.0, "0 < S < 1"),
        ("lam", 0.0, "lam must be > 0"),
        ("mu", -1.0, "mu must be > 0"),
        ("r0", 0.0, "r0 must be > 0"),
    ])
    def test_single_violations(self, field, value, fragment):
        with pytest.raises(ParameterError, match=fragment.replace("(", "\\(")):
            make_params(**{field: value})

    def test_geometry_ordering(self):
        with pytest.raises(ParameterError, match="r0 < R0"):
            make_params(r0=2.0, R0=1.0)

    def test_validate_params_idempotent(self):
        p = make_params()
        assert validate_params(p) is p

    def test_validate_params_from_mapping(self):
        raw = dict(k=1.0, lam=1.0, mu=1.0, rho_f0=1.0, D=1.0, S_sieve=0.5,
                   sigma1=1.0, p_a=0.0, p_st=0.0, F0=0.0, r0=1.0, R0=2.0)
        p = validate_params(raw)
        assert isinstance(p, ModelParams)
        with pytest.raises(ParameterError, match="unknown parameter"):
            validate_params({**raw, "bogus": 3.0})
        del raw["mu"]
        with pytest.raises(ParameterError, match="missing parameter 'mu'"):
            validate_params(raw)


class TestLameStar:
    @pytest.mark.parametrize("lam,mu,expected", [
        (1.0, 1.0, 3.0),
        (1e-12, 1.0, 2.0 + 1e-12),
        (2.0, 0.5, 3.0),
    ])
    def test_values(self, lam, mu, expected):
        assert lame_star(make_params(lam=lam, mu=mu)) == pytest.approx(
            expected, rel=0, abs=0)


class TestMixture:
    def test_hand_value(self):
        thetaM, rhoM = mixture_fields(0.5, 1.5, make_params(rho_f0=1.0))
        assert thetaM == 0.5
        assert rhoM == 2.0

    def test_pure_matrix_limit(self):
        _, rhoM = mixture_fields(1e-12, 1.7, make_params(rho_f0=1.0))
        assert rhoM == pytest.approx(1.7, rel=1e-11)

    def test_equal_density_mixture(self):
        _, rhoM = mixture_fields(0.5, 1.0, make_params(rho_f0=1.0))
        assert rhoM == pytest.approx(1.0, rel=1e-15)

    @pytest.mark.parametrize("thetaF", [0.0, 1.0, -0.2, 1.5])
    def test_porosity_domain(self, thetaF):
        with pytest.raises(ValueError, match="porosity"):
            mixture_fields(thetaF, 1.0, make_params())

    def test_nonpositive_matrix_density(self):
        with pytest.raises(ValueError, match="matrix density"):
            mixture_fields(0.9, 0.9, make_params(rho_f0=1.0))

    def test_mixture_closure_inverts(self):
        # rho_f0*thetaF + rhoM*thetaM must reproduce rho.
        rng = np.random.default_rng(42)
        p = make_params(rho_f0=1.3)
        for _ in range(200):
            thetaF = rng.uniform(0.05, 0.95)
            rho = rng.uniform(p.rho_f0 * thetaF + 0.01, 5.0)
            thetaM, rhoM = mixture_fields(thetaF, rho, p)
            back = p.rho_f0 * thetaF + rhoM * thetaM
            assert back == pytest.approx(rho, rel=1e-14)


class TestAnisotropicModuli:
    def test_isotropic_embedding_round_trip(self):
        m = AnisotropicModuli.isotropic(1.7, 0.4)
        assert m.e11 == 1.7 + 0.8
        assert m.e22 == m.e11
        assert m.e33 == 0.4
        assert m.e12 == 1.7
        assert m.e13 == 0.0 and m.e23 == 0.0
        assert m.is_isotropic()
        assert m.to_lame() == (1.7, 0.4)

    def test_positivity_enforced(self):
        with pytest.raises(ParameterError, match="e11"):
            AnisotropicModuli(e11=0.0, e22=1.0, e33=1.0, e12=0.0,
                              e13=0.0, e23=0.0)
        with pytest.raises(ParameterError, match="e13"):
            AnisotropicModuli(e11=1.0, e22=1.0, e33=1.0, e12=0.0,
                              e13=-0.1, e23=0.0)

    def test_generic_matrix_not_isotropic(self):
        m = AnisotropicModuli(e11=2.0, e22=1.0, e33=1.0, e12=0.0,
                              e13=1.0, e23=0.0)
        assert not m.is_isotropic()
        with pytest.raises(ValueError):
            m.to_lame()
