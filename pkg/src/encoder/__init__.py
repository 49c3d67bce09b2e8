# Coordinate positional encoder
from .sinusoidal import SinusoidalConfig, sinusoidal_transform
from .positional import PositionalEncoder, pe_forward
