#!/usr/bin/env python3
# Copyright 2026 The ppgbench Authors
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
"""Closed-form parameter counts for the default architectures.

Layer arithmetic only; shares nothing with the C++ builders. The printed
values are frozen in tests/unit/test_architectures.cpp.
"""


def conv1d(c_in, c_out, k):
    return c_out * c_in * k + c_out


def conv2d(c_in, c_out, kh, kw):
    return c_out * c_in * kh * kw + c_out


def dense(n_in, n_out):
    return n_out * n_in + n_out


def pulsenet(kernels, branch=32, hidden=64, classes=2):
    total = sum(conv1d(1, branch, k) for k in kernels)
    total += dense(3 * branch, hidden) + dense(hidden, classes)
    return total


def vgg16_inv_feature_len(n):
    for convs in (2, 2, 3, 3, 3):
        n -= 2 * convs
        n //= min(2, n)
    return n


def vgg16_inv(input_len=200, channels=(512, 512, 256, 128, 64), hidden=64, classes=2):
    total, c_in = 0, 1
    for convs, c_out in zip((2, 2, 3, 3, 3), channels):
        for _ in range(convs):
            total += conv1d(c_in, c_out, 3)
            c_in = c_out
    flat = c_in * vgg16_inv_feature_len(input_len)
    total += dense(flat, hidden) + dense(hidden, hidden) + dense(hidden, classes)
    return total


def cnn2d(channels=(16, 32, 64), classes=2):
    total, c_in = 0, 1
    for c_out in channels:
        total += conv2d(c_in, c_out, 3, 3)
        c_in = c_out
    return total + dense(c_in, classes)


if __name__ == "__main__":
    print("pulsenet (50,30,20):", pulsenet((50, 30, 20)))
    print("pulsenet (50,10,4):", pulsenet((50, 10, 4)))
    print("pulsenet (15,8,2):", pulsenet((15, 8, 2)))
    print("vgg16_inv input 200:", vgg16_inv())
    print("cnn2d 33x18:", cnn2d())
