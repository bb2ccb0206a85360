# Copyright 2026 The boxdeform Authors.
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

"""Graph-convolutional deformation of meshed boxes into target surfaces."""

import json as _json

try:
    from . import _boxdeform as _core
except ImportError:  # build tree: the extension sits next to, not inside, the package
    import _boxdeform as _core

globals().update({name: getattr(_core, name) for name in dir(_core) if not name.startswith("_")})


def network(**config):
    """Build a network from keyword arguments such as hops=2, channels=192."""
    return _core.Network(_json.dumps(config))


def train(net, pairs, **config):
    """Train `net` in place on a list of {"source", "target"} pairs."""
    return _core.train(net, list(pairs), _json.dumps(config))


def evaluate(net, pairs, **kwargs):
    """Per-pair and mean metrics as a list of dicts."""
    text = _core.evaluate(net, list(pairs), **kwargs)
    return [_json.loads(line) for line in text.splitlines() if line]
