"""Class-specific incoherent subspace features and p-norm classification."""

from .core import (ClassDataset, FeatureBank, NormPair, ResponseGrid,
                   coherence_report, operator_norm, vector_pnorm)
from .preprocess import QrReduction, lift_features, normalize_columns, qr_reduce
from .prox import (ProxSpec, project_grid, project_l1_ball, project_l1_sphere,
                   project_l2_ball, project_l2_sphere, project_linf_ball,
                   project_linf_sphere)
from .trainer import (TrainConfig, TrainingError, TrainReport, beta_for, fit,
                      grassmann_bound, init_features, project_to_orthonormal,
                      project_to_response_set, train)
from .classifier import (EvaluationSummary, LinearFeatureMap, Prediction,
                         classify, evaluate, nn_classify, ns_classify)
from .data_io import (DataError, SyntheticSpec, generate_synthetic, load_csv,
                      load_model, save_csv, save_model)

__version__ = "0.1.0"
