"""Rational approximation by linear programming, AAA, and small rational networks."""
from .aaa import BarycentricRational, aaa_fit, bary_eval, mse
from .basis import Box, DegreeSpec, RationalApprox, Scheme, eval_rational, index_set
from .bisection import BisectOptions, bisect_fit, feasible
from .data import GridDataset, SampleSet, grid_function, load_grid, sample_function, save_grid
from .diffcorr import FitReport, fit, fit_relu_rational, uniform_error
from .errors import (BracketError, DegenerateFitError, DomainError, GridParseError,
                     InvariantViolation, LpStructureError, NumericalError, PoleError,
                     RatnetError, SolverStalledError)

__version__ = "0.1.0"
