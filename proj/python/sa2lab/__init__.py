#
# Copyright 2026 The SA2 Lab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""Python bindings for the SA2 lab C++ core."""

from sa2lab._core import (
    CSV_HEADER,
    amplify_by_sampling,
    calibrate_sigma,
    donation_time_amplify,
    gaussian_eps_analytic,
    gaussian_eps_classic,
    gaussian_sigma_analytic,
    shuffle_eps_analytic,
    simulate,
    subsampled_gaussian_eps,
    sweep_csv,
)

__all__ = [
    "CSV_HEADER",
    "amplify_by_sampling",
    "calibrate_sigma",
    "donation_time_amplify",
    "gaussian_eps_analytic",
    "gaussian_eps_classic",
    "gaussian_sigma_analytic",
    "shuffle_eps_analytic",
    "simulate",
    "subsampled_gaussian_eps",
    "sweep_csv",
]
