"""Human-object interactive foreground matting from virtual modalities."""
from .scene import SynthConfig, SceneSample, ModalityBundle, composite, synth_scene, derive_modalities
from .config import Config, StageConfig, desk_preset

__version__ = "0.1.0"
