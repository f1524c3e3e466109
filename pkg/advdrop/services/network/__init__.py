from advdrop.services.network.checkpoint import load_checkpoint, save_checkpoint
from advdrop.services.network.model import Linear, Model, build, forward

__all__ = ["Linear", "Model", "build", "forward", "load_checkpoint", "save_checkpoint"]
