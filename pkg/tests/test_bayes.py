import json
import math

import numpy as np
import pytest

from infogauge import (
    ConjugateGaussianModel,
    DimensionMismatch,
    GaussianComponent,
    GaussianNoiseLikelihood,
    GridBayesProblem,
    GridSpec,
    HeteroscedasticGaussianLikelihood,
    conjugate_grid_problem,
    discretize,
    entropy_conservation_audit,
    entropy_conservation_audit_grid,
    fisher_conservation_audit,
    grid_posterior,
    mutual_information_conjugate,
    pointwise_identity_residual,
    posterior_conjugate,
)
from infogauge.bayes import DISCRETIZATION_ALLOWANCE, load_model, model_from_dict
from infogauge.corpus import (
    bimodal_prior_problem,
    heteroscedastic_problem,
    mixture_1d,
    random_conjugate_model,
    unit_conjugate_model,
)

H1 = 0.5 * math.log(2 * math.pi * math.e)


@pytest.fixture(scope="module")
def unit_model():
    return unit_conjugate_model()


class TestPosteriorConjugate:
    def test_single_zero_observation(self, unit_model):
        post = posterior_conjugate(unit_model, [[0.0]])
        assert post.mean[0] == pytest.approx(0.0)
        assert post.covariance[0, 0] == pytest.approx(0.5)

    def test_single_informative_observation(self, unit_model):
        post = posterior_conjugate(unit_model, [[2.0]])
        assert post.mean[0] == pytest.approx(1.0)
        assert post.covariance[0, 0] == pytest.approx(0.5)

    def test_empty_data_returns_prior(self):
        model = ConjugateGaussianModel(GaussianComponent([0.3], [[2.0]]), [[1.0]], 0)
        post = posterior_conjugate(model, np.zeros((0, 1)))
        assert post is model.prior

    def test_observation_count_enforced(self, unit_model):
        with pytest.raises(DimensionMismatch):
            posterior_conjugate(unit_model, [[0.0], [1.0]])


class TestEntropyAuditAnalytic:
    def test_unit_channel_values(self, unit_model):
        r = entropy_conservation_audit(unit_model)
        info = mutual_information_conjugate(unit_model)
        assert r.rhs == pytest.approx(1.418939, abs=1e-6)
        assert r.lhs - info == pytest.approx(1.072365, abs=1e-6)  # posterior entropy
        assert info == pytest.approx(0.5 * math.log(2), abs=1e-12)
        assert abs(r.residual) <= 1e-10

    def test_uninformative_noise(self):
        model = ConjugateGaussianModel(GaussianComponent([0.0], [[1.0]]), [[1e12]], 1)
        assert mutual_information_conjugate(model) == pytest.approx(0.0, abs=1e-9)
        assert abs(entropy_conservation_audit(model).residual) <= 1e-10

    def test_diagonal_2d_additivity(self):
        model = ConjugateGaussianModel(
            GaussianComponent([0.0, 0.0], np.diag([1.0, 2.0])),
            np.diag([0.5, 3.0]), 2,
        )
        info = mutual_information_conjugate(model)
        per_axis = sum(
            mutual_information_conjugate(
                ConjugateGaussianModel(GaussianComponent([0.0], [[s0]]), [[sn]], 2)
            )
            for s0, sn in ((1.0, 0.5), (2.0, 3.0))
        )
        assert info == pytest.approx(per_axis, abs=1e-12)


class TestFisherAuditAnalytic:
    def test_unit_channel(self, unit_model):
        r = fisher_conservation_audit(unit_model)
        assert r.rhs == pytest.approx(1.0)          # prior Fisher
        assert r.lhs + 1.0 == pytest.approx(2.0)    # J_post = lhs + K, K = 1
        assert abs(r.residual) <= 1e-10

    def test_linearity_in_observations(self):
        model = ConjugateGaussianModel(GaussianComponent([0.0], [[1.0]]), [[1.0]], 3)
        post = posterior_conjugate(model, np.zeros((3, 1)))
        assert np.trace(post.precision) == pytest.approx(4.0)
        r = fisher_conservation_audit(model)
        assert r.lhs == pytest.approx(1.0)  # 4 - 3
        assert abs(r.residual) <= 1e-10

    def test_uninformative_limit(self):
        model = ConjugateGaussianModel(GaussianComponent([0.0], [[1.0]]), [[1e12]], 1)
        post = posterior_conjugate(model, np.zeros((1, 1)))
        assert np.trace(post.precision) == pytest.approx(1.0, abs=1e-9)
        assert abs(fisher_conservation_audit(model).residual) <= 1e-10

    def test_randomized_models_exact(self):
        rng = np.random.default_rng(99)
        for i in range(30):
            model = random_conjugate_model(rng, 1 + i % 3)
            assert abs(entropy_conservation_audit(model).residual) <= 1e-10
            assert abs(fisher_conservation_audit(model).residual) <= 1e-10
            post = posterior_conjugate(model, np.zeros((model.n_obs, model.dim)))
            assert np.trace(post.precision) >= np.trace(model.prior.precision)


class TestPointwiseIdentity:
    def test_conjugate_on_grid(self, unit_model):
        prob = conjugate_grid_problem(unit_model, GridSpec((8.0,), (256,)))
        rng = np.random.default_rng(0)
        audit = pointwise_identity_residual(prob, prob.sample_dataset(rng))
        assert audit.max_residual <= 1e-8

    def test_uninformative_data_gives_prior(self, unit_model):
        prob = conjugate_grid_problem(unit_model, GridSpec((8.0,), (256,)))
        flat = GridBayesProblem(prob.prior, GaussianNoiseLikelihood([[1e12]], 1))
        post = grid_posterior(flat, np.array([[0.0]]))
        # i(x) ~ 0 and posterior == prior up to rounding
        assert np.max(np.abs(post.info_gain)) <= 1e-9
        assert np.max(np.abs(post.density.values - prob.prior.values)) <= 1e-9

    def test_uniform_prior_uniform_likelihood(self):
        # flat prior and flat likelihood: no information moves anywhere,
        # so i(x) = 0 and posterior surprisal equals prior surprisal
        from infogauge import normalize, surprisal_field

        spec = GridSpec((1.0,), (64,))
        prior = normalize(spec, np.ones(64))

        class FlatLikelihood:
            dim = 1
            n_obs = 1

            def sample(self, x, rng):
                return rng.uniform(-1.0, 1.0, size=(1, 1))

            def log_field(self, points, dataset):
                return np.zeros(points.shape[0])

        prob = GridBayesProblem(prior, FlatLikelihood())
        post = grid_posterior(prob, np.array([[0.3]]))
        assert np.max(np.abs(post.info_gain)) <= 1e-12
        assert np.array_equal(
            surprisal_field(post.density).values, surprisal_field(prior).values
        )
        audit = pointwise_identity_residual(prob, np.array([[0.3]]))
        assert audit.max_residual <= 1e-12

    def test_bimodal_prior(self):
        prob = bimodal_prior_problem()
        audit = pointwise_identity_residual(prob, np.array([[0.0]]))
        assert audit.max_residual <= 1e-8
        assert audit.n_floored == len(audit.floored_indices)

    def test_many_datasets(self):
        prob = bimodal_prior_problem()
        rng = np.random.default_rng(3)
        for _ in range(10):
            audit = pointwise_identity_residual(prob, prob.sample_dataset(rng))
            assert audit.max_residual <= 1e-8


class TestGridAudits:
    def test_conjugate_entropy_matches_analytic_oracle(self, unit_model):
        prob = conjugate_grid_problem(unit_model, GridSpec((8.0,), (256,)))
        r = entropy_conservation_audit_grid(prob, 400, seed=21)
        assert r.within_mc(3.0, DISCRETIZATION_ALLOWANCE)
        # grid prior entropy (rhs) agrees with the analytic value
        assert r.rhs == pytest.approx(H1, abs=1e-6)
        # the mutual-information piece: lhs - H_post, against the channel formula
        info = mutual_information_conjugate(unit_model)
        h_post = H1 - info
        assert r.lhs - h_post == pytest.approx(info, abs=5 * r.mc_std_error + 1e-3)

    def test_zero_information_likelihood(self, unit_model):
        prior = discretize(unit_model.prior, GridSpec((8.0,), (256,)))
        prob = GridBayesProblem(prior, GaussianNoiseLikelihood([[1e12]], 1))
        r = entropy_conservation_audit_grid(prob, 200, seed=4)
        assert abs(r.residual) <= 3 * r.mc_std_error + 1e-6
        assert r.lhs == pytest.approx(r.rhs, abs=1e-5)

    def test_bimodal_prior_entropy(self):
        r = entropy_conservation_audit_grid(bimodal_prior_problem(), 800, seed=5)
        assert r.within_mc(3.0, DISCRETIZATION_ALLOWANCE)
        assert r.mc_std_error > 0

    def test_bimodal_prior_fisher(self):
        r = fisher_conservation_audit(bimodal_prior_problem(), 800, seed=6)
        assert r.within_mc(3.0, DISCRETIZATION_ALLOWANCE)

    def test_heteroscedastic_curvature(self):
        # x-dependent likelihood curvature: the case where K genuinely
        # requires the joint expectation
        prob = heteroscedastic_problem()
        rf = fisher_conservation_audit(prob, 800, seed=7)
        assert rf.within_mc(3.0, DISCRETIZATION_ALLOWANCE)
        re = entropy_conservation_audit_grid(prob, 800, seed=8)
        assert re.within_mc(3.0, DISCRETIZATION_ALLOWANCE)

    def test_mc_error_halves_with_quadruple_datasets(self):
        prob = bimodal_prior_problem()
        r1 = entropy_conservation_audit_grid(prob, 250, seed=11)
        r4 = entropy_conservation_audit_grid(prob, 1000, seed=11)
        ratio = r4.mc_std_error / r1.mc_std_error
        assert 0.25 <= ratio <= 1.0
        assert r1.within_mc(3.0, DISCRETIZATION_ALLOWANCE)
        assert r4.within_mc(3.0, DISCRETIZATION_ALLOWANCE)

    def test_seed_reproducibility(self):
        prob = bimodal_prior_problem()
        a = entropy_conservation_audit_grid(prob, 100, seed=13)
        b = entropy_conservation_audit_grid(prob, 100, seed=13)
        assert a.residual == b.residual
        assert a.mc_std_error == b.mc_std_error


class TestModelFiles:
    def test_roundtrip(self, tmp_path):
        spec = {
            "prior": {"mean": [0.0], "covariance": [[1.0]]},
            "noise_covariance": [[1.0]],
            "n_obs": 1,
        }
        path = tmp_path / "model.json"
        path.write_text(json.dumps(spec))
        model = load_model(path)
        assert model.n_obs == 1
        assert abs(entropy_conservation_audit(model).residual) <= 1e-10

    def test_likelihood_family_parsing(self):
        from infogauge.bayes import likelihood_from_dict

        like = likelihood_from_dict({"gaussian_noise": {"covariance": [[2.0]], "n_obs": 3}})
        assert isinstance(like, GaussianNoiseLikelihood)
        assert like.n_obs == 3
        like2 = likelihood_from_dict({"heteroscedastic_gaussian": {"n_obs": 2}})
        assert isinstance(like2, HeteroscedasticGaussianLikelihood)
        with pytest.raises(ValueError):
            likelihood_from_dict({"poisson": {}})

    def test_model_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            model_from_dict({
                "prior": {"mean": [0.0, 0.0], "covariance": [[1.0, 0.0], [0.0, 1.0]]},
                "noise_covariance": [[1.0]],
                "n_obs": 1,
            })

    def test_grid_problem_from_file_formats(self):
        # compose a grid problem from the density file format plus a
        # named likelihood family
        from infogauge.bayes import likelihood_from_dict
        from infogauge.density import density_from_dict

        mix = density_from_dict({
            "kind": "gaussian_mixture", "weights": [0.5, 0.5],
            "means": [[-2.0], [2.0]], "covariances": [[[0.64]], [[0.64]]],
        })
        prior = discretize(mix, GridSpec((10.0,), (256,)))
        like = likelihood_from_dict({"gaussian_noise": {"covariance": [[1.0]]}})
        prob = GridBayesProblem(prior, like)
        r = entropy_conservation_audit_grid(prob, 200, seed=31)
        assert r.within_mc(3.0, DISCRETIZATION_ALLOWANCE)


class TestConservationReport:
    def test_residual_definition_enforced(self):
        from infogauge import ConservationReport

        with pytest.raises(ValueError):
            ConservationReport("entropy", 1.0, 0.5, 0.4)

    def test_identity_names(self):
        from infogauge import ConservationReport

        with pytest.raises(ValueError):
            ConservationReport("energy", 1.0, 1.0, 0.0)
