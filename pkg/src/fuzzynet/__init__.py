"""fuzzynet: trainable fuzzy-logic networks with extractable boolean rules."""

from .dataio import Dataset, SplitSpec, fit_normalizer, generate_waveform, load_csv, save_csv, split
from .extraction import (build_expressions, eval_snapped, render, render_listing,
                         simplify, snap_network)
from .layers import (Network, build_dnn, build_fuzzy_network, load_model,
                     max_predict, save_model)
from .ops import boolean_table, gate_abs, gate_sq, gate_sqrt, gate_sqrt_nary, snap_alpha
from .training import (EvalReport, TrainConfig, compare_operators, encode_targets,
                       evaluate, grad_check, train, train_epoch, train_gate)

__version__ = "0.1.0"
