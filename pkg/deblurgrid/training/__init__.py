from .checkpoint import load_checkpoint, read_header, save_checkpoint
from .crf import CameraResponse, crf_apply, effective_gamma
from .gradcheck import GradProbe, check_pipeline_gradients, tiny_problem
from .log import TrainLog, read_log
from .loss import loss_recon
from .state import TrainState, build_state
from .trainer import ForwardResult, Trainer, blur_patches, check_finite, forward, train_step

__all__ = [
    "CameraResponse",
    "ForwardResult",
    "GradProbe",
    "TrainLog",
    "TrainState",
    "Trainer",
    "blur_patches",
    "build_state",
    "check_finite",
    "check_pipeline_gradients",
    "crf_apply",
    "effective_gamma",
    "forward",
    "load_checkpoint",
    "loss_recon",
    "read_header",
    "read_log",
    "save_checkpoint",
    "tiny_problem",
    "train_step",
]
