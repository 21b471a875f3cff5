import numpy as np
import pytest
import torch

from ppgtrainer.cyclegan import PatchDiscriminator, ResnetGenerator


@pytest.fixture
def tiny_models():
    """Small double-precision model set for objective/gradient tests."""
    torch.manual_seed(0)
    gen_xy = ResnetGenerator(4, 1).double()
    gen_yx = ResnetGenerator(4, 1).double()
    disc_x = PatchDiscriminator(4, 1).double()
    disc_y = PatchDiscriminator(4, 1).double()
    return gen_xy, gen_yx, disc_x, disc_y


@pytest.fixture
def tiny_batches():
    torch.manual_seed(1)
    x = torch.rand(2, 1, 8, 8, dtype=torch.float64) * 2 - 1
    y = torch.rand(2, 1, 8, 8, dtype=torch.float64) * 2 - 1
    return x, y


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def make_window_image(rng):
    """Synthetic pairwise-sum window image like the pipeline produces."""
    window = np.clip(
        0.5 + 0.4 * np.sin(np.linspace(0, 6 * np.pi, 256) + rng.uniform(0, 6)), 0.0, 1.0
    )
    raw = np.floor((window[:, None] + window[None, :]) * 128.0)
    return np.minimum(raw, 255).astype(np.uint8)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Tiny corpus produced by the pipeline CLI (the real exchange surface)."""
    from ppgdenoise.cli import main as ppgdn
    from ppgdenoise.dataset import save_bidmc, save_e4_acc
    from ppgdenoise.synthetic import synth_accel_trace, synth_record

    root = tmp_path_factory.mktemp("corpus")
    records = root / "records"
    traces = root / "traces"
    traces.mkdir()
    for k in range(6):
        save_bidmc(synth_record(f"rec{k:02d}", seed=k, duration_s=240.0), records)
    for i, (activity, intensity) in enumerate(
        [("waving", "low"), ("waving", "high"), ("finger_tapping", "high")]
    ):
        save_e4_acc(synth_accel_trace(activity, intensity, 120.0, seed=i), traces / f"{activity}_{intensity}.csv")
    out = root / "out"
    code = ppgdn(
        [
            "synth",
            "--data-dir", str(records),
            "--traces-dir", str(traces),
            "--out-dir", str(out),
            "--gain", "3.0",
            "--seed", "0",
        ]
    )
    assert code == 0
    return out
