import numpy as np
import pytest

from dmasense import (
    ChannelSet,
    DegenerateMeasurementError,
    InvalidConfigurationError,
    InvalidInputError,
    NoiseSpec,
    NoSignalError,
    SecondSourceUndetectableError,
    SourceSpec,
    angular_separation,
    build_dictionary,
    estimate_dual,
    estimate_single,
    fit_polarization,
    noiseless_vector,
    pol_error,
    projection_score,
    random_configs,
    random_polarization_states,
    synthesize_measurements,
    synthesize_model,
)


@pytest.fixture(scope="module")
def channels20(model_coarse):
    return ChannelSet.from_model(model_coarse, random_configs(20, model_coarse.n_meta, 21))


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def test_build_dictionary_shapes_and_columns(channels20):
    D = build_dictionary(channels20, 3)
    assert D.shape == (20, 2)
    np.testing.assert_array_equal(D[:, 0], channels20.H_full[:, 6])
    np.testing.assert_array_equal(D[:, 1], channels20.H_full[:, 7])
    one = ChannelSet(
        H_full=channels20.H_full[:1], configs=channels20.configs[:1], grid=channels20.grid
    )
    assert build_dictionary(one, 0).shape == (1, 2)


def test_dictionaries_tile_the_full_channel_stack(channels20):
    stacked = np.hstack(
        [build_dictionary(channels20, d) for d in range(channels20.grid.n_directions)]
    )
    np.testing.assert_array_equal(stacked, channels20.H_full)


def test_fit_polarization_consistent_system():
    rng = np.random.default_rng(0)
    D = _crandn(rng, 20, 2)
    c0 = _crandn(rng, 2)
    c = fit_polarization(D, D @ c0)
    assert np.linalg.norm(c - c0) < 1e-12 * np.linalg.norm(c0)


def test_fit_polarization_zero_dictionary():
    np.testing.assert_array_equal(
        fit_polarization(np.zeros((5, 2)), np.ones(5)), np.zeros(2)
    )


def test_fit_polarization_matches_normal_equations():
    rng = np.random.default_rng(1)
    for _ in range(20):
        D = _crandn(rng, 20, 2)
        y = _crandn(rng, 20)
        c = fit_polarization(D, y)
        G = D.conj().T @ D
        c_oracle = np.linalg.solve(G, D.conj().T @ y)
        assert np.linalg.norm(c - c_oracle) < 1e-10 * np.linalg.norm(c_oracle)


def test_projection_score_extremes():
    rng = np.random.default_rng(2)
    D = _crandn(rng, 15, 2)
    c = _crandn(rng, 2)
    y_in = D @ c
    assert abs(projection_score(D, fit_polarization(D, y_in), y_in) - 1.0) < 1e-12
    # orthogonal complement: remove the column-space component
    y = _crandn(rng, 15)
    Q, _ = np.linalg.qr(D)
    y_perp = y - Q @ (Q.conj().T @ y)
    score = projection_score(D, fit_polarization(D, y_perp), y_perp)
    assert score < 1e-12
    with pytest.raises(DegenerateMeasurementError):
        projection_score(D, c, np.zeros(15))


def test_projection_score_scale_invariance():
    rng = np.random.default_rng(3)
    for _ in range(100):
        D = _crandn(rng, 12, 2)
        y = _crandn(rng, 12)
        s = (0.1 + rng.random() * 5) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        eta = projection_score(D, fit_polarization(D, y), y)
        eta_scaled = projection_score(D * s, fit_polarization(D * s, y), y)
        assert abs(eta - eta_scaled) < 1e-12


def test_estimate_single_noiseless_exact_recovery(channels20):
    rng = np.random.default_rng(4)
    for d0 in rng.integers(0, channels20.grid.n_directions, size=10):
        c0 = random_polarization_states(1, rng)[0]
        src = SourceSpec(int(d0), c0)
        y = noiseless_vector(channels20, [src])
        est = estimate_single(channels20, y)
        assert est.d_hat == d0
        assert pol_error(src.c_bar, est.c_bar_hat) < 1e-6
        assert abs(est.eta_map[est.d_hat] - 1.0) < 1e-10


def test_estimate_single_restricted_search_set(channels20):
    src = SourceSpec(7, [1.0, 1.0])
    y = noiseless_vector(channels20, [src])
    search = np.array([2, 7, 11])
    est = estimate_single(channels20, y, search)
    assert est.d_hat == 7
    outside = np.setdiff1d(np.arange(channels20.grid.n_directions), search)
    assert np.all(est.eta_map[outside] == -1.0)
    assert np.all(est.eta_map[search] >= 0.0)


def test_estimate_single_k1_is_uninformative(model_coarse):
    channels = ChannelSet.from_model(model_coarse, random_configs(1, model_coarse.n_meta, 5))
    y = noiseless_vector(channels, [SourceSpec(9, [1.0, 0.5])])
    est = estimate_single(channels, y)
    # a 1 x 2 system is always consistent, so every nonzero dictionary
    # explains the measurement and the tie breaks to the smallest index
    assert est.d_hat == 0
    assert np.all(est.eta_map == 1.0)


def test_estimate_single_errors(channels20):
    with pytest.raises(DegenerateMeasurementError):
        estimate_single(channels20, np.zeros(20))
    zero_channels = ChannelSet(
        H_full=np.zeros_like(channels20.H_full),
        configs=channels20.configs,
        grid=channels20.grid,
    )
    with pytest.raises(NoSignalError):
        estimate_single(zero_channels, np.ones(20))
    with pytest.raises(InvalidConfigurationError):
        estimate_single(channels20, np.ones(20), np.array([], dtype=int))


def test_estimate_single_no_diversity_noise_floor(grid_coarse):
    # same reflection coefficient for both load states: the channel stack has
    # rank one, every direction explains the same share and errors sit at the
    # random-guess level on average
    alpha = 0.8 * np.exp(0.4j)
    model = synthesize_model(6, grid_coarse, seed=30, alpha=alpha, beta=alpha)
    channels = ChannelSet.from_model(model, random_configs(3, 6, 31))
    rng = np.random.default_rng(32)
    valid = np.arange(grid_coarse.n_directions)
    doa_errors = []
    pol_errors = []
    for trial in range(200):
        d0 = int(rng.choice(valid))
        c0 = random_polarization_states(1, rng)[0]
        src = SourceSpec(d0, c0)
        meas = synthesize_measurements(
            channels, [src], NoiseSpec(sigma2=0.5, seed=1000 + trial)
        )
        est = estimate_single(channels, meas.y)
        doa_errors.append(angular_separation(d0, est.d_hat, grid_coarse))
        pol_errors.append(pol_error(src.c_bar, est.c_bar_hat))
    assert 70.0 < np.mean(doa_errors) < 110.0
    assert 35.0 < np.mean(pol_errors) < 55.0


def test_estimate_dual_noiseless_recovery(model_coarse):
    channels = ChannelSet.from_model(model_coarse, random_configs(40, model_coarse.n_meta, 33))
    grid = channels.grid
    d1 = grid.index_of(120.0, 60.0)
    d2 = grid.index_of(-60.0, 120.0)
    state = np.array([1.0, 1.0]) / np.sqrt(2)
    jam = SourceSpec(d1, state)
    tx = SourceSpec(d2, 0.1 * state)  # 20 dB weaker
    y = noiseless_vector(channels, [jam, tx])
    est = estimate_dual(channels, y, exclusion_radius=10.0)
    assert est.d_hat_1 == d1 and est.d_hat_2 == d2
    assert pol_error(jam.c_bar, est.c_bar_hat_1) < 0.5
    assert pol_error(tx.c_bar, est.c_bar_hat_2) < 0.5
    # residual after the first cancellation is orthogonal to that dictionary
    D1 = build_dictionary(channels, est.d_hat_1)
    c1_first = fit_polarization(D1, y)
    y_res = y - D1 @ c1_first
    assert np.max(np.abs(D1.conj().T @ y_res)) < 1e-10 * np.linalg.norm(y)
    # the exclusion neighborhood of the first estimate stays unevaluated
    assert est.eta_res_map[d1] == -1.0


def test_estimate_dual_joint_refit_beats_sequential(model_coarse):
    channels = ChannelSet.from_model(model_coarse, random_configs(25, model_coarse.n_meta, 34))
    rng = np.random.default_rng(35)
    jam = SourceSpec(10, _crandn(rng, 2))
    tx = SourceSpec(40, 0.2 * _crandn(rng, 2))
    meas = synthesize_measurements(channels, [jam, tx], NoiseSpec(sigma2=1e-3, seed=36))
    y = meas.y
    est = estimate_dual(channels, y)
    D1 = build_dictionary(channels, est.d_hat_1)
    D2 = build_dictionary(channels, est.d_hat_2)
    # sequential fits on the same pair of directions
    c1_seq = fit_polarization(D1, y)
    c2_seq = fit_polarization(D2, y - D1 @ c1_seq)
    seq_residual = np.linalg.norm(y - D1 @ c1_seq - D2 @ c2_seq)
    joint_residual = np.linalg.norm(y - D1 @ est.c_hat_1 - D2 @ est.c_hat_2)
    assert joint_residual <= seq_residual + 1e-12 * np.linalg.norm(y)


def test_estimate_dual_single_source_raises(channels20):
    y = noiseless_vector(channels20, [SourceSpec(6, [1.0, -1.0j])])
    with pytest.raises(SecondSourceUndetectableError):
        estimate_dual(channels20, y)


def test_estimate_dual_exclusion_can_empty_the_search(channels20):
    y = noiseless_vector(
        channels20, [SourceSpec(6, [1.0, 0.0]), SourceSpec(12, [0.1, 0.0])]
    )
    with pytest.raises(InvalidConfigurationError):
        estimate_dual(channels20, y, exclusion_radius=181.0)


def test_pol_error_reference_values():
    e1 = np.array([1.0, 0.0])
    e2 = np.array([0.0, 1.0])
    assert pol_error(e1, e1) == 0.0
    assert pol_error(e1, e2) == 90.0
    assert pol_error(e1, np.exp(1j * np.pi / 3) * e1) < 1e-9
    mixed = np.array([1.0, 1.0]) / np.sqrt(2)
    assert abs(pol_error(e1, mixed) - 45.0) < 1e-12


def test_pol_error_symmetry():
    rng = np.random.default_rng(6)
    for _ in range(50):
        a = random_polarization_states(1, rng)[0]
        b = random_polarization_states(1, rng)[0]
        assert abs(pol_error(a, b) - pol_error(b, a)) < 1e-12
        assert 0.0 <= pol_error(a, b) <= 90.0


def test_estimate_single_rejects_length_mismatch(channels20):
    with pytest.raises(InvalidInputError):
        estimate_single(channels20, np.ones(7))
