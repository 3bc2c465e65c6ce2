"""Static SVG renderings of sweeps and holonomy matrices."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp so repeated runs give identical files
_RC = {"svg.hashsalt": "uhlmann", "svg.fonttype": "none", "font.size": 9}


def _save(fig, filename):
    fig.savefig(filename, format="svg", metadata={"Date": None})
    plt.close(fig)


def _zero_crossings(x, y):
    s = np.sign(y)
    k = np.flatnonzero(s[:-1] * s[1:] < 0)
    # linear interpolation between the bracketing samples
    return x[k] - y[k] * (x[k + 1] - x[k]) / (y[k + 1] - y[k])


def plot_sweep(filename, delta, columns, labels, ylabel):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        for y, lab in zip(columns, labels):
            line, = ax.plot(delta, y, lw=1.2, label=lab)
            xs = _zero_crossings(delta, np.asarray(y))
            ax.plot(xs, np.zeros_like(xs), "o", ms=3, mfc="none", color=line.get_color())
        ax.axhline(0.0, color="0.5", lw=0.6)
        ax.set_xlim(delta[0], delta[-1])
        ax.set_xticks(np.pi * np.arange(5) / 2)
        ax.set_xticklabels(["0", "π/2", "π", "3π/2", "2π"])
        ax.set_xlabel("φ1 − φ0")
        ax.set_ylabel(ylabel)
        ax.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        _save(fig, filename)


def plot_holonomy(filename, matrix, title=""):
    """Modulus and phase of the holonomy entries side by side."""
    m = np.asarray(matrix)
    with plt.rc_context(_RC):
        fig, (a1, a2) = plt.subplots(1, 2, figsize=(6.4, 3.0))
        im1 = a1.imshow(np.abs(m), cmap="viridis", vmin=0.0, vmax=1.0)
        ph = np.where(np.abs(m) > 1e-9, np.angle(m), np.nan)
        im2 = a2.imshow(ph, cmap="twilight", vmin=-np.pi, vmax=np.pi)
        a1.set_title("|U|")
        a2.set_title("arg U")
        for ax, im in ((a1, im1), (a2, im2)):
            ax.set_xticks(range(m.shape[1]))
            ax.set_yticks(range(m.shape[0]))
            fig.colorbar(im, ax=ax, shrink=0.8)
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        _save(fig, filename)
