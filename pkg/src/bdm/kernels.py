"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``BDM_PURE_PYTHON=1`` to force the fallback (used by the benchmark and the
kernel-parity tests).
"""

import os

from . import _pykernels as python_impl

try:
    from . import _ckernels as compiled_impl
except ImportError:  # extension not built
    compiled_impl = None

if compiled_impl is not None and not os.environ.get("BDM_PURE_PYTHON"):
    _impl = compiled_impl
else:
    _impl = python_impl

IMPLEMENTATION = _impl.IMPLEMENTATION

log_gamma = _impl.log_gamma
trigamma = _impl.trigamma
shape_jeffreys_log = _impl.shape_jeffreys_log
reg_gamma_lower = _impl.reg_gamma_lower
reg_gamma_upper = _impl.reg_gamma_upper
reg_beta = _impl.reg_beta
gamma_levelset = _impl.gamma_levelset

log_gamma_array = _impl.log_gamma_array
trigamma_array = _impl.trigamma_array
shape_jeffreys_log_array = _impl.shape_jeffreys_log_array
reg_gamma_lower_array = _impl.reg_gamma_lower_array
reg_gamma_upper_array = _impl.reg_gamma_upper_array
reg_beta_array = _impl.reg_beta_array
gamma_levelset_array = _impl.gamma_levelset_array
