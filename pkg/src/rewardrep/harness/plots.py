"""Figure rendering for the report path: learning curves, predicted-reward
heatmaps, and trajectory maps, written next to their CSV outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from rewardrep.gridworld.grid import TileKind
from rewardrep.gridworld.render import COLORS


def plot_curves(points, out_png, title="Learning curve"):
    steps = [p.step for p in points]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    mean_r = np.array([p.mean_reward for p in points])
    band_r = np.array([p.reward_band for p in points])
    axes[0].plot(steps, mean_r, color="tab:blue")
    axes[0].fill_between(steps, mean_r - band_r, mean_r + band_r, alpha=0.25)
    axes[0].set_xlabel("environment steps")
    axes[0].set_ylabel("mean evaluation reward")
    mean_l = np.array([p.min_episode_len for p in points])
    band_l = np.array([p.len_band for p in points])
    axes[1].plot(steps, mean_l, color="tab:orange")
    axes[1].fill_between(steps, mean_l - band_l, mean_l + band_l, alpha=0.25, color="tab:orange")
    axes[1].set_xlabel("environment steps")
    axes[1].set_ylabel("min episode length")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def plot_heatmap(values, grid, out_png, title="Mean predicted reward"):
    fig, ax = plt.subplots(figsize=(max(4, grid.width / 2), max(4, grid.height / 2)))
    masked = np.ma.masked_invalid(values)
    im = ax.imshow(masked, cmap="viridis", origin="upper")
    fig.colorbar(im, ax=ax, shrink=0.8)
    if grid.goal is not None:
        ax.plot(grid.goal[0], grid.goal[1], "r*", markersize=14)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def plot_trajectories(episodes, grid, out_png, title="Trajectories"):
    """Paths colored early (blue) to late (red) over the tile map."""
    base = np.ones((grid.height, grid.width, 3))
    for y in range(grid.height):
        for x in range(grid.width):
            base[y, x] = COLORS[TileKind(int(grid.tiles[y, x]))]
    fig, ax = plt.subplots(figsize=(max(4, grid.width / 2), max(4, grid.height / 2)))
    ax.imshow(base, origin="upper")
    cmap = plt.get_cmap("coolwarm")
    for ep in episodes:
        tiles = ep["tiles"]
        if len(tiles) < 2:
            xs, ys = [tiles[0][0]], [tiles[0][1]]
            ax.plot(xs, ys, "o", color="blue", markersize=4)
            continue
        for i in range(len(tiles) - 1):
            (x0, y0), (x1, y1) = tiles[i], tiles[i + 1]
            ax.plot([x0, x1], [y0, y1], color=cmap(i / max(1, len(tiles) - 2)), linewidth=2)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def heatmap_csv(values, path):
    """Header row of x-coordinates, one row per y, empty cells off the map."""
    height, width = values.shape
    with open(path, "w") as fh:
        fh.write("y\\x," + ",".join(str(x) for x in range(width)) + "\n")
        for y in range(height):
            cells = [
                "" if np.isnan(values[y, x]) else format(values[y, x], ".8g")
                for x in range(width)
            ]
            fh.write(f"{y}," + ",".join(cells) + "\n")
