"""codonsoup: a deterministic soup of self-replicating codons."""

from .analytics import EventKind, EventRecord, StrandRecord, extract_strands, negate, replicate, reverse, symmetrize
from .config import SimulationConfig, load_config, load_preset, parse_config
from .engine import RunResult, Simulation, SimulationState, encode_seed_strand, init_soup, run, step
from .exceptions import CodonsoupException
from .model import CodonState, CodonType, FieldSize, FieldSlot, SplittingState, Vec2

__version__ = "0.1.0"
