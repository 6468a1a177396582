from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids in the SVG output
matplotlib.rcParams["svg.hashsalt"] = "radial-figure1"


def plot_growth_curves(r: np.ndarray, curves: Mapping[int, Mapping[str, np.ndarray]], path: Path) -> Path:
    """u (solid) and v (dashed) against r, one colour per dimension."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(7, 5))
    for N, values in curves.items():
        line, = ax.plot(r, values["u"], label=f"u, N={N}")
        ax.plot(r, values["v"], linestyle="--", color=line.get_color(), label=f"v, N={N}")
    ax.set_xlabel("r")
    ax.set_ylabel("u(r), v(r)")
    ax.legend(loc="upper left", fontsize="small")
    ax.grid(True, alpha=0.3)

    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
