"""Dense networks, optimizers and gradient checking."""
from unsup_speech_features.neuralnet.gradcheck import GradientCheckResult
from unsup_speech_features.neuralnet.gradcheck import gradient_check
from unsup_speech_features.neuralnet.network import NetworkSpec
from unsup_speech_features.neuralnet.network import Parameters
from unsup_speech_features.neuralnet.network import backward
from unsup_speech_features.neuralnet.network import forward
from unsup_speech_features.neuralnet.network import init_parameters
from unsup_speech_features.neuralnet.optimizers import Adadelta
from unsup_speech_features.neuralnet.optimizers import Optimizer
from unsup_speech_features.neuralnet.optimizers import Sgd


__all__ = [
    "Adadelta",
    "GradientCheckResult",
    "NetworkSpec",
    "Optimizer",
    "Parameters",
    "Sgd",
    "backward",
    "forward",
    "gradient_check",
    "init_parameters",
]
