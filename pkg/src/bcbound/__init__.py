"""Outer bounds for two-receiver discrete memoryless broadcast channels."""

from .probcore import (Channel, JointDist, VariableSpec, bsc_pair, cond_mutual_info, entropy,
                       marginalize, product_channel, random_channel)
from .schemes import (CommonScheme, PrivateScheme, build_common_joint, build_private_joint,
                      rate_point_common, rate_point_private, residuals_common, residuals_private)

__all__ = [
    "Channel", "JointDist", "VariableSpec", "bsc_pair", "cond_mutual_info", "entropy", "marginalize",
    "product_channel", "random_channel", "CommonScheme", "PrivateScheme", "build_common_joint",
    "build_private_joint", "rate_point_common", "rate_point_private", "residuals_common",
    "residuals_private",
]
