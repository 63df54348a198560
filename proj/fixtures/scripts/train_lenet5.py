#!/usr/bin/env python3
# Copyright 2026 The qnet Authors.
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
"""Trains the committed LeNet-5 fixture and writes descriptor + CNNW weights.

Usage: train_lenet5.py MNIST_DIR OUT_DIR

MNIST_DIR holds the four uncompressed IDX files. The last 5,000 training
images are held out of training; the first 1,000 of those become the
calibration slice. Pixels are scaled to [0, 1] with no mean subtraction.
"""
import json
import struct
import sys
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

HOLDOUT = 5000
CALIB = 1000


def read_idx(path):
    data = Path(path).read_bytes()
    magic, count = struct.unpack(">II", data[:8])
    if magic == 0x803:
        rows, cols = struct.unpack(">II", data[8:16])
        return np.frombuffer(data, np.uint8, offset=16).reshape(count, rows, cols)
    assert magic == 0x801
    return np.frombuffer(data, np.uint8, offset=8)


def write_idx(path, array):
    with open(path, "wb") as f:
        if array.ndim == 3:
            f.write(struct.pack(">IIII", 0x803, *array.shape))
        else:
            f.write(struct.pack(">II", 0x801, array.shape[0]))
        f.write(array.astype(np.uint8).tobytes())


class LeNet5(nn.Module):
    def __init__(self):
        super().__init__()
        self.conv1 = nn.Conv2d(1, 6, 5)
        self.conv2 = nn.Conv2d(6, 16, 5)
        self.fc1 = nn.Linear(16 * 4 * 4, 120)
        self.fc2 = nn.Linear(120, 10)

    def forward(self, x):
        x = F.max_pool2d(F.relu(self.conv1(x)), 2)
        x = F.max_pool2d(F.relu(self.conv2(x)), 2)
        x = F.relu(self.fc1(x.flatten(1)))
        return self.fc2(x)


def write_cnnw(path, tensors):
    with open(path, "wb") as f:
        f.write(b"CNNW")
        f.write(struct.pack("<II", 1, len(tensors)))
        for name, t in tensors:
            raw = name.encode("utf-8")
            f.write(struct.pack("<H", len(raw)))
            f.write(raw)
            f.write(struct.pack("<BB", 0, t.ndim))
            for d in t.shape:
                f.write(struct.pack("<I", d))
            f.write(np.ascontiguousarray(t, dtype="<f4").tobytes())


def main():
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    torch.manual_seed(20160101)
    np.random.seed(20160101)
    torch.set_num_threads(1)

    train_x = read_idx(src / "train-images-idx3-ubyte")
    train_y = read_idx(src / "train-labels-idx1-ubyte")
    test_x = read_idx(src / "t10k-images-idx3-ubyte")
    test_y = read_idx(src / "t10k-labels-idx1-ubyte")

    fit_x = torch.tensor(train_x[:-HOLDOUT], dtype=torch.float32).unsqueeze(1) / 255.0
    fit_y = torch.tensor(train_y[:-HOLDOUT], dtype=torch.long)
    val_x = torch.tensor(test_x, dtype=torch.float32).unsqueeze(1) / 255.0
    val_y = torch.tensor(test_y, dtype=torch.long)

    model = LeNet5()
    opt = torch.optim.Adam(model.parameters(), lr=1e-3)
    sched = torch.optim.lr_scheduler.StepLR(opt, step_size=4, gamma=0.3)
    for epoch in range(12):
        model.train()
        perm = torch.randperm(fit_x.shape[0])
        for i in range(0, fit_x.shape[0], 64):
            idx = perm[i:i + 64]
            opt.zero_grad()
            loss = F.cross_entropy(model(fit_x[idx]), fit_y[idx])
            loss.backward()
            opt.step()
        sched.step()
        model.eval()
        with torch.no_grad():
            acc = (model(val_x).argmax(1) == val_y).float().mean().item()
        print(f"epoch {epoch} val top-1 {acc:.4f}", flush=True)

    out.mkdir(parents=True, exist_ok=True)
    descriptor = {
        "name": "lenet5",
        "input_shape": [1, 28, 28],
        "layers": [
            {"name": "conv1", "type": "conv2d", "out_channels": 6, "kernel": [5, 5],
             "stride": 1, "pad": 0, "bias": True},
            {"name": "relu1", "type": "relu"},
            {"name": "pool1", "type": "maxpool", "window": 2, "stride": 2},
            {"name": "conv2", "type": "conv2d", "out_channels": 16, "kernel": [5, 5],
             "stride": 1, "pad": 0, "bias": True},
            {"name": "relu2", "type": "relu"},
            {"name": "pool2", "type": "maxpool", "window": 2, "stride": 2},
            {"name": "fc1", "type": "fully_connected", "out_features": 120, "bias": True},
            {"name": "relu3", "type": "relu"},
            {"name": "fc2", "type": "fully_connected", "out_features": 10, "bias": True},
        ],
    }
    (out / "lenet5.json").write_text(json.dumps(descriptor, indent=2) + "\n")
    sd = {k: v.detach().numpy() for k, v in model.state_dict().items()}
    write_cnnw(out / "lenet5.cnnw", [
        ("conv1.weight", sd["conv1.weight"]), ("conv1.bias", sd["conv1.bias"]),
        ("conv2.weight", sd["conv2.weight"]), ("conv2.bias", sd["conv2.bias"]),
        ("fc1.weight", sd["fc1.weight"]), ("fc1.bias", sd["fc1.bias"]),
        ("fc2.weight", sd["fc2.weight"]), ("fc2.bias", sd["fc2.bias"]),
    ])
    with torch.no_grad():
        logits = model(val_x[:100]).numpy()
    write_cnnw(out / "reference_logits.cnnw", [("t10k.logits", logits)])

    calib = slice(train_x.shape[0] - HOLDOUT, train_x.shape[0] - HOLDOUT + CALIB)
    mnist_out = out.parent / "mnist"
    mnist_out.mkdir(parents=True, exist_ok=True)
    write_idx(mnist_out / "calib-images-idx3-ubyte", train_x[calib])
    write_idx(mnist_out / "calib-labels-idx1-ubyte", train_y[calib])
    write_idx(mnist_out / "t10k-images-idx3-ubyte", test_x)
    write_idx(mnist_out / "t10k-labels-idx1-ubyte", test_y)


if __name__ == "__main__":
    main()
