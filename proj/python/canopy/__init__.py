# Copyright 2026 The Canopy Authors. All Rights Reserved.
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

"""Tree recognizer: inference engine, graph optimizer, retraining and service."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional, Sequence, Union

from ._canopy import (
    CanopyError,
    Model,
    build_mini_inception,
    conv2d,
    default_passes,
    default_tree_classes,
    fully_connected,
    global_avg_pool,
    head_gradients,
    load_model,
    optimize,
    pool,
    quantize,
    relu,
    run_cli,
    softmax,
    write_synthetic_dataset,
)
from . import _canopy

PathLike = Union[str, os.PathLike]

__all__ = [
    "CanopyError",
    "Classifier",
    "Model",
    "Service",
    "build_mini_inception",
    "conv2d",
    "default_passes",
    "default_tree_classes",
    "fully_connected",
    "global_avg_pool",
    "head_gradients",
    "load_model",
    "optimize",
    "pool",
    "quantize",
    "relu",
    "retrain",
    "run_cli",
    "softmax",
    "write_synthetic_dataset",
]


def retrain(
    data: PathLike,
    out: PathLike,
    *,
    learning_rate: float = 0.01,
    epochs: int = 40,
    batch_size: int = 32,
    seed: int = 0,
    validation_fraction: float = 0.10,
    test_fraction: float = 0.10,
    augment: str = "none",
    extractor_seed: int = 42,
    threads: int = 0,
) -> dict:
    """Retrains the classifier head on ``data/<class>/`` and exports to ``out``.

    Returns the training report as a dict.
    """
    return json.loads(
        _canopy._retrain(
            os.fspath(data), os.fspath(out), learning_rate, epochs, batch_size, seed,
            validation_fraction, test_fraction, augment, extractor_seed, threads,
        )
    )


class Classifier:
    def __init__(
        self,
        model: PathLike,
        catalog: Optional[PathLike] = None,
        labels: Optional[PathLike] = None,
    ):
        self._impl = _canopy._Classifier(
            os.fspath(model),
            None if catalog is None else os.fspath(catalog),
            None if labels is None else os.fspath(labels),
        )

    @property
    def labels(self) -> list:
        return self._impl.labels

    def classify(self, image: Union[bytes, PathLike], k: int = 3) -> dict:
        """Top-k predictions for encoded image bytes or an image path."""
        if not isinstance(image, (bytes, bytearray)):
            image = Path(image).read_bytes()
        return json.loads(self._impl.classify_json(bytes(image), k))


class Service:
    """HTTP recognizer service on a background thread; usable as a context manager."""

    def __init__(
        self,
        model: PathLike,
        catalog: PathLike,
        host: str = "127.0.0.1",
        port: int = 0,
        max_upload_bytes: int = 16 * 1024 * 1024,
    ):
        self._impl = _canopy._Service(
            os.fspath(model), os.fspath(catalog), host, port, max_upload_bytes
        )
        self.host = host

    @property
    def port(self) -> int:
        return self._impl.port

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def start(self) -> int:
        return self._impl.start()

    def stop(self) -> None:
        self._impl.stop()

    def __enter__(self) -> "Service":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()
