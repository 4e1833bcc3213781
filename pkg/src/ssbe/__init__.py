"""PINN and Sobolev-stable boundary enforcement (SSBE) for second-order PDEs.

numpy-only networks with exact value/gradient/Laplacian propagation, chart
based boundary losses, Adam training, error metrics and theory probes.
"""
from .diffnet import (Activation, InvalidArchitecture, Jet, JetAdjoint, JetTape, NetworkParams,
                      forward_jet, forward_value, init_params, param_count, pullback)
from .geometry import Chart, ChartSet, Domain, DomainKind, OutOfChart, make_charts
from .losses import (ExactField, LossReport, LossWeights, Method, loss_and_gradient,
                     loss_gradient, pinn_loss, prepare, ssbe_loss)
from .metrics import Norm, relative_error
from .optimizer import AdamState, LrSchedule, adam_step, lr_at
from .problems import PdeProblem, ProblemKind, problem_factory
from .sampling import SampleSet, make_samples

__version__ = "0.1.0"
