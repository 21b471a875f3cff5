"""PPG motion-artifact toolkit: noise synthesis, window classification,
signal/image translation plumbing, and heart-rate-domain evaluation."""

from .detector import ClassScores, DetectorWeights, infer, load_weights, save_weights
from .imaging import GrayImage, decode, encode, read_pgm, write_pgm
from .metrics import EvalReport, EvalRow, PeakSeries, aggregate, detect_peaks
from .noise import AccelTrace, NoisyRecord, mix, motion_noise, snr_db
from .signals import RawSignal, SignalWindow, normalize, resample, window_split

__version__ = "0.1.0"

__all__ = [
    "AccelTrace",
    "ClassScores",
    "DetectorWeights",
    "EvalReport",
    "EvalRow",
    "GrayImage",
    "NoisyRecord",
    "PeakSeries",
    "RawSignal",
    "SignalWindow",
    "aggregate",
    "decode",
    "detect_peaks",
    "encode",
    "infer",
    "load_weights",
    "mix",
    "motion_noise",
    "normalize",
    "read_pgm",
    "resample",
    "save_weights",
    "snr_db",
    "window_split",
    "write_pgm",
]
