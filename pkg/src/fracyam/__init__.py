from .constants import ParamPoint, Regime, constants, gamma_fn

__version__ = "0.1.0"
__all__ = ["ParamPoint", "Regime", "constants", "gamma_fn"]
