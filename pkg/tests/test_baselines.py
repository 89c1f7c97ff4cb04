"""Spectral baselines: exact-isomorphism recovery, noise regimes, equivariance."""

import numpy as np
import pytest

from ppmatch import (
    InvalidParameterError,
    Permutation,
    grampa,
    grampa_similarity,
    overlap,
    sample_cgw,
    sample_goe,
    sample_permutation_uniform,
    spectral_decomposition,
    substream,
    umeyama,
)


def rng_for(*path):
    return substream(424242, *path)


class TestSpectralDecomposition:
    def test_reconstruction_and_ordering(self):
        m = sample_goe(120, rng_for("sd"))
        dec = spectral_decomposition(m)
        recon = dec.eigenvectors @ np.diag(dec.eigenvalues) @ dec.eigenvectors.T
        assert np.linalg.norm(recon - m) <= 1e-8 * np.linalg.norm(m)
        assert np.all(np.diff(dec.eigenvalues) >= 0)
        gram = dec.eigenvectors.T @ dec.eigenvectors
        assert np.allclose(gram, np.eye(120), atol=1e-10)

    def test_rejects_non_square(self):
        with pytest.raises(Exception):
            spectral_decomposition(np.zeros((3, 4)))


class TestUmeyama:
    def test_self_match_with_distinct_eigenvalues(self):
        a = sample_goe(25, rng_for("um1"))
        assert umeyama(a, a) == Permutation.identity(25)

    def test_recovers_exact_isomorphism(self):
        a = sample_goe(30, rng_for("um2"))
        p = sample_permutation_uniform(30, rng_for("um3"))
        m = p.matrix()
        assert umeyama(a, m @ a @ m.T) == p

    def test_low_noise_regime(self):
        vals = []
        for r in range(10):
            rng = rng_for("um4", r)
            xstar = sample_permutation_uniform(500, rng)
            pair = sample_cgw(500, 0.05, xstar, rng)
            vals.append(overlap(umeyama(pair.a, pair.b), xstar))
        assert float(np.mean(vals)) >= 0.5


class TestGrampa:
    def test_self_match(self):
        a = sample_goe(20, rng_for("gr1"))
        assert grampa(a, a, eta=0.2) == Permutation.identity(20)

    def test_recovers_exact_isomorphism(self):
        a = sample_goe(30, rng_for("gr2"))
        p = sample_permutation_uniform(30, rng_for("gr3"))
        m = p.matrix()
        assert grampa(a, m @ a @ m.T, eta=0.2) == p

    def test_low_noise_regime(self):
        hits = 0
        for r in range(10):
            rng = rng_for("gr4", r)
            xstar = sample_permutation_uniform(500, rng)
            pair = sample_cgw(500, 0.01, xstar, rng)
            hits += overlap(grampa(pair.a, pair.b), xstar) >= 0.99
        assert hits >= 9

    def test_high_noise_failure_regime(self):
        vals = []
        for r in range(10):
            rng = rng_for("gr5", r)
            xstar = sample_permutation_uniform(500, rng)
            pair = sample_cgw(500, 0.8, xstar, rng)
            vals.append(overlap(grampa(pair.a, pair.b), xstar))
        assert float(np.mean(vals)) <= 0.2

    def test_similarity_is_finite(self):
        a = sample_goe(40, rng_for("gr6"))
        b = sample_goe(40, rng_for("gr7"))
        sim = grampa_similarity(spectral_decomposition(a), spectral_decomposition(b), eta=0.01)
        assert np.isfinite(sim).all()

    @pytest.mark.parametrize("eta", [0.0, -0.2])
    def test_rejects_non_positive_eta(self, eta):
        a = sample_goe(5, rng_for("gr8"))
        with pytest.raises(InvalidParameterError):
            grampa(a, a, eta=eta)


class TestEquivariance:
    def test_both_baselines_are_permutation_equivariant(self):
        for r in range(10):
            rng = rng_for("eqv", r)
            n = 30
            xstar = sample_permutation_uniform(n, rng)
            pair = sample_cgw(n, 0.1, xstar, rng)
            p = sample_permutation_uniform(n, rng_for("eqr", r))
            m = p.matrix()
            relabeled = m @ pair.b @ m.T
            assert umeyama(pair.a, relabeled) == p.compose(umeyama(pair.a, pair.b))
            assert grampa(pair.a, relabeled) == p.compose(grampa(pair.a, pair.b))
