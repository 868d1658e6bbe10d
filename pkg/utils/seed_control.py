import numpy as np
import random
import os


def set_global_seed(seed=42):
    np.random.seed(seed)
    random.seed(seed)
    os.environ["PYTHONHASHSEED"] = str(seed)


def derive_rng(seed, *streams):
    """Independent generator for a named sub-stream of one master seed.

    Each extra integer selects a stream, so (seed, run, worker) never
    collides with (seed, run + 1, worker).
    """
    return np.random.default_rng([int(seed), *[int(s) for s in streams]])
