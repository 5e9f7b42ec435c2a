# SPDX-License-Identifier: Apache-2.0
"""Bi-directional low-pass graph filtering (BiGCN) with a C++ core."""

from ._core import (
    BigcnError,
    ConfigError,
    admm_bifilter,
    apply_feature_rate,
    apply_noise_level,
    apply_noise_rate,
    apply_structure_mistakes,
    build_fixed_L2,
    build_learnable_L2,
    exact_smoother,
    normalized_laplacian,
    oracle_check,
    preset,
    presets,
    roc_auc,
    run_experiment,
    sylvester_oracle,
)

__version__ = "0.1.0"
