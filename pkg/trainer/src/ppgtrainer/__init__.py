"""Training component: unpaired image translation and the window classifier,
communicating with the signal pipeline only through PGM images, signal CSVs,
and the portable weights file."""

from .cyclegan import (
    PatchDiscriminator,
    ResnetGenerator,
    adversarial_loss,
    cycle_loss,
    total_objective,
)
from .detector import DetectorTrainConfig, WindowClassifier, train_detector
from .training import TrainConfig, train_cyclegan
from .translation import translate

__version__ = "0.1.0"
