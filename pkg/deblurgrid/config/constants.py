"""System-wide constants and named training presets."""

# ── Field ─────────────────────────────────────────────────────────
APP_FEATURE_DIM = 27
DENSITY_SHIFT = -1.0
DIRECTION_FREQS = 2

# ── Optimizer ─────────────────────────────────────────────────────
ADAM_BETAS = (0.9, 0.99)
ADAM_EPS = 1e-8

# ── Camera response ───────────────────────────────────────────────
CRF_MIN_GAMMA = 0.2

# ── Storage ───────────────────────────────────────────────────────
CHECKPOINT_MAGIC = b"SHNF"
CHECKPOINT_VERSION = 1
LEVELS_DIR = "levels"
LEVELS_SIDECAR = "levels.json"
POSES_FILE = "poses.json"
IMAGES_DIR = "images"
DEFOCUS_DIR = "defocus"
DEPTH_DIR = "depth"
SHARP_DIR = "sharp"

# ── Metrics ───────────────────────────────────────────────────────
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# ── Presets ───────────────────────────────────────────────────────
#
# `desk` is the default and trains on a CPU in minutes.
# `full` carries the published full-scale numbers; it is a config, not something the
# tests run. `gradcheck` is the tiny 64-bit setup for finite-difference checks.
PRESETS: dict[str, dict] = {
    "desk": {
        "iters": 4000,
        "grid_res": 64,
        "density_rank": 8,
        "app_rank": 8,
        "hidden_dim": 64,
        "samples_per_ray": 128,
        "n_patches": 28,
        "P": 22,
        "K": 11,
        "N_k": 400,
        "n_skip": 100,
    },
    "full": {
        "iters": 30000,
        "grid_res": 480,
        "density_rank": 132,
        "app_rank": 132,
        "hidden_dim": 64,
        "samples_per_ray": 512,
        "n_patches": 28,
        "P": 22,
        "K": 11,
        "N_k": 400,
        "n_skip": 100,
    },
    "gradcheck": {
        "iters": 10,
        "grid_res": 8,
        "density_rank": 2,
        "app_rank": 2,
        "hidden_dim": 8,
        "samples_per_ray": 8,
        "n_patches": 2,
        "P": 7,
        "K": 3,
        "N_k": 4,
        "n_skip": 1,
        "precision": 64,
        "jitter": False,
    },
}

# Fixed Gaussian bank used by the fixed-kernel baseline (stds in pixels)
FIXED_BANK_STDS = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0)

# ── CLI Colors ────────────────────────────────────────────────────
COLOR_ACCENT = "magenta"
COLOR_DIM = "grey50"
COLOR_OK = "bright_green"
COLOR_ERROR = "bright_red"
COLOR_WARN = "bright_yellow"
