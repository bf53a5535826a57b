# Copyright 2026 The ropasum Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the ropasum evaluation toolkit."""

from ropasum._core import (
    CorpusError,
    census,
    cohen_kappa,
    diagnose,
    evaluate_pair,
    gold_items,
    lcs_length,
    meteor,
    rouge_l,
    rouge_n,
    rouge_s,
    run_cli,
    se_curve,
    select_shot_count,
)

__all__ = [
    "CorpusError",
    "census",
    "cohen_kappa",
    "diagnose",
    "evaluate_pair",
    "gold_items",
    "lcs_length",
    "meteor",
    "rouge_l",
    "rouge_n",
    "rouge_s",
    "run_cli",
    "se_curve",
    "select_shot_count",
]
