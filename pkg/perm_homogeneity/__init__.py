#!/usr/bin/env python3
# Computable constructions of homogeneous permutation groups on countable ordinals
