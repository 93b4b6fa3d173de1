import os


ROOT_DIR = os.path.relpath(os.path.join(os.path.dirname(__file__), '..'))
PROJ_DIR = os.path.relpath(os.path.join(os.path.dirname(__file__), '../..'))
DATA_DIR = os.path.join(ROOT_DIR, 'data')
PRESET_DIR = os.path.join(DATA_DIR, 'presets')
PRESET_BEHAVIOR_DIR = os.path.join(PRESET_DIR, 'table_points.csv')
PRESET_FUNCTIONAL_DIR = os.path.join(PRESET_DIR, 'functionals.csv')
PRESET_ALICE_KETS_DIR = os.path.join(PRESET_DIR, 'alice_kets.csv')
PRESET_BOB_OBSERVABLES_DIR = os.path.join(PRESET_DIR, 'bob_observables.csv')

# run defaults, echoed in the header of every output file
DEFAULT_NPA_LEVEL = "2"
DEFAULT_ANGULAR_RESOLUTION = 720
DEFAULT_CHUNK_SIZE = 65536
DEFAULT_SEED = 42
DEFAULT_QUANTUM_RESOLUTION = 72  # each quantum ray is a bisection of SDP feasibility problems


def default_threads() -> int:
    """
    Number of worker threads. The LFIC_THREADS environment variable overrides the hardware parallelism.
    :return: (int) thread count, at least 1
    """
    env_value = os.environ.get("LFIC_THREADS")
    if env_value:
        try:
            return max(1, int(env_value))
        except ValueError:
            raise ValueError(f"LFIC_THREADS needs to be an integer, got {env_value!r}.")
    return os.cpu_count() or 1
