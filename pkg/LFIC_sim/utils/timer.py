"""
Contains the decorator to calculate the time for a function or method.
"""

#  Copyright (c) 2024. LFIC_sim developers. All rights reserved.

import functools
import logging
import time


logger = logging.getLogger(__name__)


def sol_timer(func):
    @functools.wraps(func)
    def calc_time(*args, **kwargs):
        time_start = time.time()
        sol = func(*args, **kwargs)
        time_end = time.time()
        logger.info(f'{func.__qualname__} sol time: {time_end - time_start:.3f}s')
        return sol
    return calc_time
