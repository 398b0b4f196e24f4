"""Skylines and grid resistance with partitioned parallel computation."""

from .core import (
    ContractViolation,
    DominanceCounter,
    Relation,
    Tuple,
    dominates,
    skyline_bnl,
    skyline_oracle,
    skyline_sfs,
)
from .datagen import Distribution, GenSpec, gen_anticorrelated, gen_uniform, generate
from .dataset import ingest_csv, normalize, write_csv
from .gres import compute_g_bar, gproj, gproj_tuple, gres_all, gres_oracle
from .harness import ExperimentConfig, run_experiment
from .metrics import RunReport, aggregate, parse, serialize
from .parallel import ConcurrencyProbe, PhaseMetrics, parallel_skyline
from .partition import (
    PartitionPlan,
    RepresentativeSet,
    Strategy,
    filter_with_representatives,
    make_plan,
    select_representatives,
)

__version__ = "0.1.0"
