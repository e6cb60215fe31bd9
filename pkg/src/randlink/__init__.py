"""Randomized neural networks built on the random vector functional link.

Shallow RVFL / ELM, sparse-pretrained RVFL, deep RVFL (dRVFL), the implicit
ensemble deep RVFL (edRVFL) and a true-ensemble baseline, plus the
cross-validation harness and Friedman / Nemenyi rank statistics used to
compare them.
"""

from .data import Dataset, FoldPlan, NormalizationParams, load_csv, normalize, one_hot, stratified_kfold
from .deep import DeepModel, forward_stack, predict_deep, train_drvfl, train_dsp_rvfl
from .ensemble import (
    EnsembleDeepModel,
    TrueEnsemble,
    combine_scores,
    ensemble_predict,
    train_edrvfl,
    train_edsp_rvfl,
    train_tedrvfl,
)
from .harness import EvalReport, GridSpec, cross_validate, grid_search, time_method
from .linalg import RidgeMode, pinv_solve, ridge_solve, sigmoid
from .methods import METHOD_IDS, MethodSpec
from .shallow import HiddenLayerParams, NetworkConfig, ShallowModel, predict, random_layer, train_elm, train_rvfl
from .sparse import FistaConfig, SparsePretrainResult, fista_l1, sp_biases, sp_hidden, train_sp_rvfl
from .stats import friedman, nemenyi_cd, rank_matrix, significance_pairs

__version__ = "0.1.0"
