import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppgdenoise.detector import (
    LAYER_PLAN,
    SHAPE_CHAIN,
    Conv1dLayer,
    DenseLayer,
    DetectorWeights,
    conv1d_valid,
    dense,
    global_avg_pool,
    infer,
    load_weights,
    maxpool1d,
    random_weights,
    save_weights,
    zero_weights,
)
from ppgdenoise.errors import (
    BadMagicError,
    ShapeError,
    TopologyError,
    TruncatedFileError,
    VersionMismatchError,
)
from ppgdenoise.signals import SignalWindow


def naive_conv1d(x, kernels, bias):
    """Nested-loop oracle for valid cross-correlation + ReLU."""
    length, channels = x.shape
    n_filters, _, width = kernels.shape
    out = np.zeros((length - width + 1, n_filters))
    for pos in range(length - width + 1):
        for k in range(n_filters):
            acc = bias[k]
            for c in range(channels):
                for w in range(width):
                    acc += x[pos + w, c] * kernels[k, c, w]
            out[pos, k] = max(acc, 0.0)
    return out


@pytest.fixture(scope="module")
def window():
    rng = np.random.default_rng(7)
    return SignalWindow(rng.uniform(0, 1, 256))


class TestConv1d:
    def test_table_shape(self, rng):
        out = conv1d_valid(rng.uniform(0, 1, (256, 1)), rng.normal(size=(70, 1, 10)), np.zeros(70))
        assert out.shape == (247, 70)

    def test_zero_weights_zero_output(self, rng):
        out = conv1d_valid(rng.uniform(0, 1, (256, 1)), np.zeros((70, 1, 10)), np.zeros(70))
        assert (out == 0).all()

    def test_impulse_response_shifts(self, rng):
        x = rng.uniform(0, 1, (40, 1))
        kernel = np.zeros((1, 1, 5))
        kernel[0, 0, 2] = 1.0
        out = conv1d_valid(x, kernel, np.zeros(1))
        np.testing.assert_allclose(out[:, 0], x[2:38, 0])

    def test_short_input_rejected(self, rng):
        with pytest.raises(ShapeError):
            conv1d_valid(rng.uniform(0, 1, (5, 1)), np.zeros((1, 1, 10)), np.zeros(1))

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_matches_naive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        length = int(rng.integers(10, 30))
        channels = int(rng.integers(1, 4))
        n_filters = int(rng.integers(1, 5))
        width = int(rng.integers(1, min(10, length) + 1))
        x = rng.normal(size=(length, channels))
        kernels = rng.normal(size=(n_filters, channels, width))
        bias = rng.normal(size=n_filters)
        np.testing.assert_allclose(
            conv1d_valid(x, kernels, bias), naive_conv1d(x, kernels, bias), atol=1e-9
        )


class TestMaxPool:
    def test_table_shape(self, rng):
        assert maxpool1d(rng.normal(size=(238, 70))).shape == (79, 70)

    def test_constant_input(self):
        out = maxpool1d(np.full((9, 2), 3.5))
        np.testing.assert_array_equal(out, np.full((3, 2), 3.5))

    def test_direct_values(self):
        out = maxpool1d(np.array([1, 5, 2, 4, 3, 6], dtype=float).reshape(-1, 1))
        np.testing.assert_array_equal(out[:, 0], [5, 6])

    def test_remainder_dropped(self):
        out = maxpool1d(np.arange(8, dtype=float).reshape(-1, 1))
        np.testing.assert_array_equal(out[:, 0], [2, 5])

    def test_too_short_rejected(self):
        with pytest.raises(ShapeError):
            maxpool1d(np.zeros((2, 1)))


class TestGlobalAvgPool:
    def test_table_shape(self, rng):
        assert global_avg_pool(rng.normal(size=(61, 140))).shape == (140,)

    def test_constant_channel(self):
        np.testing.assert_array_equal(global_avg_pool(np.full((5, 3), 2.5)), np.full(3, 2.5))

    def test_two_values(self):
        assert global_avg_pool(np.array([[0.0], [1.0]]))[0] == 0.5


class TestDense:
    def test_zero_softmax_is_uniform(self):
        out = dense(np.zeros(16), np.zeros((2, 16)), np.zeros(2), "softmax")
        np.testing.assert_allclose(out, [0.5, 0.5])

    def test_identity_relu(self):
        out = dense(np.array([-1.0, 2.0]), np.eye(2), np.zeros(2), "relu")
        np.testing.assert_array_equal(out, [0.0, 2.0])

    def test_final_stack_shapes(self, rng):
        x = rng.normal(size=140)
        x = dense(x, rng.normal(size=(32, 140)), rng.normal(size=32), "relu")
        assert x.shape == (32,)
        x = dense(x, rng.normal(size=(16, 32)), rng.normal(size=16), "relu")
        assert x.shape == (16,)
        x = dense(x, rng.normal(size=(2, 16)), rng.normal(size=2), "softmax")
        assert x.shape == (2,)
        assert x.sum() == pytest.approx(1.0, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            dense(np.zeros(3), np.zeros((2, 4)), np.zeros(2), "relu")

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_softmax_simplex(self, seed):
        rng = np.random.default_rng(seed)
        out = dense(rng.normal(size=16) * 50, rng.normal(size=(2, 16)), rng.normal(size=2), "softmax")
        assert abs(out.sum() - 1.0) <= 1e-6
        assert (out >= 0).all() and (out <= 1).all()


class TestInfer:
    def test_zero_weights_tie(self, window):
        scores = infer(window, zero_weights())
        assert scores.p_clean == 0.5 and scores.p_noisy == 0.5
        assert scores.label == "clean"  # tie routes to pass-through

    def test_shape_chain_is_enforced(self, window):
        # Swap pooling for a wrong stride via a hand-built topology clone.
        weights = random_weights(3)
        scores = infer(window, weights)
        assert scores.p_clean + scores.p_noisy == pytest.approx(1.0, abs=1e-9)

    def test_deterministic(self, window):
        weights = random_weights(11)
        first = infer(window, weights)
        second = infer(window, weights)
        assert first.p_clean == second.p_clean and first.p_noisy == second.p_noisy

    def test_shape_chain_matches_plan(self, window):
        # Instrumented replay of the stack, checking each documented shape.
        from ppgdenoise import detector as det

        weights = random_weights(5)
        x = window.samples.reshape(-1, 1)
        seen = []
        for layer in weights.layers:
            if layer.kind == "conv1d":
                x = det.conv1d_valid(x, layer.weights, layer.bias)
            elif layer.kind == "maxpool1d":
                x = det.maxpool1d(x, layer.pool, layer.stride)
            elif layer.kind == "gap":
                x = det.global_avg_pool(x)
            else:
                x = det.dense(x, layer.weights, layer.bias, layer.activation)
            seen.append(x.shape)
        assert tuple(seen) == SHAPE_CHAIN


class TestWeightsFile:
    def test_round_trip_bit_exact(self, tmp_path):
        weights = random_weights(42)
        path = tmp_path / "w.bin"
        save_weights(weights, path)
        loaded = load_weights(path)
        for a, b in zip(weights.layers, loaded.layers):
            assert a.plan_entry() == b.plan_entry()
            if hasattr(a, "weights"):
                assert a.weights.tobytes() == b.weights.tobytes()
                assert a.bias.tobytes() == b.bias.tobytes()

    def test_save_load_save_is_identical(self, tmp_path):
        weights = random_weights(7)
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        save_weights(weights, p1)
        save_weights(load_weights(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_wrong_filter_count_names_layer_1(self, tmp_path):
        weights = random_weights(0)
        bad_first = Conv1dLayer(np.zeros((69, 1, 10), dtype=np.float32), np.zeros(69, dtype=np.float32))
        with pytest.raises(TopologyError, match="layer 1"):
            DetectorWeights((bad_first,) + weights.layers[1:])
        # And via the file route: hand-assemble the same broken payload.
        path = tmp_path / "bad.bin"
        save_weights(weights, path)
        data = bytearray(path.read_bytes())
        # Patch the first conv's out_channels field (offset: 8 magic + 8 header + 1 kind).
        data[17:21] = (69).to_bytes(4, "little")
        # Shrink payload accordingly: remove one filter's weights and bias.
        head = 8 + 8 + 1 + 12
        removed = 1 * 10 * 4
        del data[head + 69 * 10 * 4 : head + 70 * 10 * 4]
        bias_at = head + 69 * 10 * 4
        del data[bias_at + 69 * 4 : bias_at + 70 * 4]
        path.write_bytes(bytes(data))
        with pytest.raises(TopologyError, match="layer 1"):
            load_weights(path)

    def test_truncated_file_reports_offset(self, tmp_path):
        path = tmp_path / "w.bin"
        save_weights(random_weights(1), path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(TruncatedFileError, match="byte offset"):
            load_weights(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "w.bin"
        save_weights(random_weights(1), path)
        data = bytearray(path.read_bytes())
        data[0] = ord(b"X")
        path.write_bytes(bytes(data))
        with pytest.raises(BadMagicError):
            load_weights(path)

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "w.bin"
        save_weights(random_weights(1), path)
        data = bytearray(path.read_bytes())
        data[8:12] = (99).to_bytes(4, "little")
        path.write_bytes(bytes(data))
        with pytest.raises(VersionMismatchError):
            load_weights(path)

    def test_trailing_garbage_rejected(self, tmp_path):
        path = tmp_path / "w.bin"
        save_weights(random_weights(1), path)
        path.write_bytes(path.read_bytes() + b"junk")
        with pytest.raises(TruncatedFileError, match="trailing"):
            load_weights(path)


class TestTopology:
    def test_plan_covers_nine_layers(self):
        assert len(LAYER_PLAN) == len(SHAPE_CHAIN) == 9

    def test_wrong_dense_width_names_layer(self):
        weights = random_weights(0)
        bad = DenseLayer(
            np.zeros((128, 140), dtype=np.float32), np.zeros(128, dtype=np.float32), "relu"
        )
        with pytest.raises(TopologyError, match="layer 7"):
            DetectorWeights(weights.layers[:6] + (bad,) + weights.layers[7:])
