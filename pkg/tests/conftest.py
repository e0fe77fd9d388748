#!/usr/bin/env python3
# pytest configuration and global fixtures

from hypothesis import settings

# Property tests run from a fixed seed so failures reproduce across machines
settings.register_profile("deterministic", derandomize=True, max_examples=60)
settings.load_profile("deterministic")
