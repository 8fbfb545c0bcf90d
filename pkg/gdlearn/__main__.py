"""Dictionary learning under a global sparsity budget.

```sh
gdlearn synth-bench --series 1 --sigma-list 0,0.05 --method gdl --seed 7 --out-dir out
gdlearn denoise --image house.pgm --noise gaussian-salt-pepper --sigma 20 --seed 1
gdlearn learn --signals X.csv --atoms 50 --K 4500 --seed 3 --out-dir out
gdlearn noise --image house.pgm --noise salt-pepper --p 10 --seed 1 --out noisy.pgm
gdlearn dct-dict --patch-side 8 --atoms-per-dim 16 --out dct.csv
```

Every run takes an explicit `--seed`. Progress is logged to stderr, results go to
files only. Exit codes: 0 success, 1 runtime error, 2 bad flags.
"""

import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.logging import RichHandler

from gdlearn._baselines import overcomplete_dct_dictionary
from gdlearn._bench import (
    BenchConfig,
    LearnerSettings,
    LearnMethod,
    run_learner,
    run_synth_bench,
)
from gdlearn._data import apply_noise
from gdlearn._denoiser import (
    DEFAULT_DCT_SIGMAS,
    DenoiseConfig,
    DenoiseMethod,
    Denoiser,
)
from gdlearn._io import (
    load_matrix_csv,
    load_pgm,
    store_coefficients_csv,
    store_history_csv,
    store_matrix_csv,
    store_pgm,
    store_table_csv,
)
from gdlearn._metrics import MetricsReport
from gdlearn._patches import dictionary_mosaic
from gdlearn.errors import GdlError
from gdlearn.model import (
    HomogeneousGaussianPlusSaltPepper,
    NoiseSpec,
    NonhomogeneousGaussian,
    NonhomogeneousGaussianPlusSaltPepper,
    SaltPepper,
)

_logger = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, no_args_is_help=True)

METRICS_HEADER = (
    "method",
    "seed",
    "K",
    "iters",
    "psnr_noisy_db",
    "psnr_recon_db",
    "wall_seconds",
    "dct_sigma",
)


class NoiseKind(str, Enum):
    NONHOMOGENEOUS_GAUSSIAN = "nonhomogeneous-gaussian"
    SALT_PEPPER = "salt-pepper"
    GAUSSIAN_SALT_PEPPER = "gaussian-salt-pepper"
    NONHOMOGENEOUS_GAUSSIAN_SALT_PEPPER = "nonhomogeneous-gaussian-salt-pepper"


def noise_spec(kind: NoiseKind, delta: float, sigma: float, p: float) -> NoiseSpec:
    match kind:
        case NoiseKind.NONHOMOGENEOUS_GAUSSIAN:
            return NonhomogeneousGaussian(delta)
        case NoiseKind.SALT_PEPPER:
            return SaltPepper(p)
        case NoiseKind.GAUSSIAN_SALT_PEPPER:
            return HomogeneousGaussianPlusSaltPepper(sigma, p)
        case NoiseKind.NONHOMOGENEOUS_GAUSSIAN_SALT_PEPPER:
            return NonhomogeneousGaussianPlusSaltPepper(delta, p)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        msg = f"'{text}' is not a comma-separated list of numbers"
        raise typer.BadParameter(msg) from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        msg = f"'{text}' is not a comma-separated list of integers"
        raise typer.BadParameter(msg) from None


_SEED = typer.Option(..., "--seed", help="Seed of every random draw of the run.")
_OUT_DIR = typer.Option(Path("."), "--out-dir", help="Directory for the output files.")
_NO_TIMING = typer.Option(
    False, "--no-timing", help="Write wall times as 0 so reruns are byte-identical."
)
_NOISE = typer.Option(NoiseKind.GAUSSIAN_SALT_PEPPER, "--noise", help="Noise model.")
_DELTA = typer.Option(0.0, "--delta", help="Ramp deviation at the upper-left pixel.")
_SIGMA = typer.Option(0.0, "--sigma", help="Homogeneous Gaussian deviation.")
_P = typer.Option(0.0, "--p", help="Percentage of salt-and-pepper pixels.")
_CLIP = typer.Option(False, "--clip", help="Clip the noisy image to [0, 255].")


@app.callback()
def main(
    silent: bool = typer.Option(
        False, "-s", "--silent", help="If true, don't print the logs."
    ),
) -> None:
    if not silent:
        logging.basicConfig(
            level="INFO",
            format="%(message)s",
            datefmt="[%X]",
            handlers=[RichHandler(console=Console(stderr=True))],
        )


@app.command("synth-bench")
def synth_bench(
    seed: int = _SEED,
    series: int = typer.Option(1, "--series", min=1, max=2),
    sigma_list: str = typer.Option("0", "--sigma-list", help="e.g. 0,0.01,0.02"),
    method: LearnMethod = typer.Option(LearnMethod.GDL, "--method"),
    K: int = typer.Option(4500, "--K", min=0, help="Global budget (gdl)."),
    k: int = typer.Option(3, "--k", min=1, help="Nonzeros per signal."),
    k_sweep: str = typer.Option("", "--k-sweep", help="Candidate k for ksvd."),
    iters: int = typer.Option(100, "--iters", min=1),
    dim: int = typer.Option(20, "--dim", min=1, help="Signal length d."),
    atoms: int = typer.Option(50, "--atoms", min=1, help="Dictionary size m."),
    signals: int = typer.Option(1500, "--signals", min=1, help="Signal count n."),
    out_dir: Path = _OUT_DIR,
    no_timing: bool = _NO_TIMING,
) -> None:
    """Recover a random dictionary from synthetic signals."""
    sigmas, candidates = _floats(sigma_list), _ints(k_sweep)
    with _runtime_errors("Benchmark failed:"):
        cfg = BenchConfig(
            series=series,
            sigmas=sigmas,
            method=method,
            K=K,
            k=k,
            k_sweep=candidates,
            iters=iters,
            seed=seed,
            d=dim,
            m=atoms,
            n=signals,
            timing=not no_timing,
        )
        run_synth_bench(cfg, out_dir)


@app.command()
def learn(
    signals: Path = typer.Option(..., "--signals", help="Signal matrix CSV (d×n)."),
    seed: int = _SEED,
    method: LearnMethod = typer.Option(LearnMethod.GDL, "--method"),
    atoms: int = typer.Option(..., "--atoms", min=1, help="Dictionary size m."),
    K: int = typer.Option(0, "--K", min=0, help="Global budget (gdl)."),
    k: int = typer.Option(1, "--k", min=1, help="Nonzeros per signal (ksvd, mod)."),
    iters: int = typer.Option(100, "--iters", min=1),
    out_dir: Path = _OUT_DIR,
) -> None:
    """Learn a dictionary for the signals of a CSV matrix."""
    with _runtime_errors("Learning failed:"):
        X = load_matrix_csv(signals)
        settings = LearnerSettings(
            method=method, m=atoms, K=K, k=k, iters=iters, seed=seed
        )
        D, A, history, _ = run_learner(X, settings)

        out_dir.mkdir(parents=True, exist_ok=True)
        store_matrix_csv(D, out_dir / "dictionary.csv")
        store_coefficients_csv(A, out_dir / "coefficients.csv")
        store_history_csv(history, out_dir / "history.csv")


@app.command()
def denoise(
    image: Path = typer.Option(..., "--image", help="Clean PGM image."),
    seed: int = _SEED,
    noise: NoiseKind = _NOISE,
    delta: float = _DELTA,
    sigma: float = _SIGMA,
    p: float = _P,
    clip: bool = _CLIP,
    method: DenoiseMethod = typer.Option(DenoiseMethod.GDL, "--method"),
    K: int = typer.Option(15000, "--K", min=0, help="Global budget (gdl)."),
    atoms: int = typer.Option(256, "--atoms", min=1),
    iters: int = typer.Option(10, "--iters", min=1),
    k: Optional[int] = typer.Option(
        None, "--k", min=1, help="Nonzeros per patch (ksvd); default round(K/n)."
    ),
    dct_sigmas: str = typer.Option(
        ",".join(f"{s:g}" for s in DEFAULT_DCT_SIGMAS),
        "--dct-sigmas",
        help="Candidate noise deviations of the dct method; the best one is kept.",
    ),
    out_dir: Path = _OUT_DIR,
    no_timing: bool = _NO_TIMING,
) -> None:
    """Corrupt an image, denoise it and report PSNR."""
    candidates = _floats(dct_sigmas)
    with _runtime_errors("Denoising failed:"):
        cfg = DenoiseConfig(
            method=method,
            K=K,
            atoms=atoms,
            iters=iters,
            seed=seed,
            k_per_column=k,
            dct_sigmas=candidates,
        )
        clean = load_pgm(image)
        noisy = apply_noise(clean, noise_spec(noise, delta, sigma, p), seed, clip)

        start = time.perf_counter()
        denoiser = Denoiser(cfg).train(noisy)
        recon = denoiser.reconstruct(clean)
        wall = time.perf_counter() - start if not no_timing else 0.0

        out_dir.mkdir(parents=True, exist_ok=True)
        store_pgm(noisy, out_dir / "noisy.pgm", clip_and_round=True)
        store_pgm(recon, out_dir / "reconstructed.pgm", clip_and_round=True)
        D = denoiser.dictionary
        store_matrix_csv(D, out_dir / "dictionary.csv")
        store_pgm(
            dictionary_mosaic(D, Denoiser.PATCH_SIDE),
            out_dir / "dictionary-mosaic.pgm",
            clip_and_round=True,
        )
        if (usage := denoiser.usage_map()) is not None:
            store_pgm(usage, out_dir / "usage-map.pgm", clip_and_round=True)
        if len(denoiser.history):
            store_history_csv(denoiser.history, out_dir / "history.csv")

        report = MetricsReport.denoising(clean, noisy, recon)
        _logger.info(
            "PSNR noisy %.2f dB, reconstructed %.2f dB",
            report.psnr_noisy_db,
            report.psnr_db,
        )
        store_table_csv(
            METRICS_HEADER,
            [
                (
                    method.value,
                    seed,
                    K,
                    len(denoiser.history),
                    *report.psnr_row(),
                    wall,
                    denoiser.dct_sigma,
                )
            ],
            out_dir / "metrics.csv",
        )


@app.command()
def noise(
    image: Path = typer.Option(..., "--image", help="Clean PGM image."),
    seed: int = _SEED,
    out: Path = typer.Option(Path("noisy.pgm"), "--out"),
    kind: NoiseKind = _NOISE,
    delta: float = _DELTA,
    sigma: float = _SIGMA,
    p: float = _P,
    clip: bool = _CLIP,
) -> None:
    """Corrupt an image with one of the noise models."""
    with _runtime_errors("Corrupting the image failed:"):
        spec = noise_spec(kind, delta, sigma, p)
        noisy = apply_noise(load_pgm(image), spec, seed, clip)
        store_pgm(noisy, out, clip_and_round=True)


@app.command("dct-dict")
def dct_dict(
    patch_side: int = typer.Option(8, "--patch-side", min=1),
    atoms_per_dim: int = typer.Option(16, "--atoms-per-dim", min=1),
    out: Path = typer.Option(Path("dct.csv"), "--out"),
) -> None:
    """Write the overcomplete DCT dictionary."""
    with _runtime_errors("Building the DCT dictionary failed:"):
        store_matrix_csv(overcomplete_dct_dictionary(patch_side, atoms_per_dim), out)


@contextmanager
def _runtime_errors(what: str) -> Iterator[None]:
    """Log library and file errors and exit with code 1."""
    try:
        yield
    except (GdlError, OSError):
        _logger.exception(what)
        raise typer.Exit(1) from None


if __name__ == "__main__":
    app()
