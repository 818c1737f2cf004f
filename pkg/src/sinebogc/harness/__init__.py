"""CLI orchestration of the verification chains."""

from .commands import (cmd_sample, cmd_verify_andreief, cmd_verify_bogc, cmd_verify_kernel_scaling,
                       cmd_verify_scaling, cmd_verify_theorem, run)
from .config import RunConfig, from_dict, load
from .report import VerificationReport, rel_gap

__all__ = ["RunConfig", "VerificationReport", "cmd_sample", "cmd_verify_andreief", "cmd_verify_bogc",
           "cmd_verify_kernel_scaling", "cmd_verify_scaling", "cmd_verify_theorem", "from_dict", "load",
           "rel_gap", "run"]
