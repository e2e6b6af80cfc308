#!/usr/bin/env python3
"""Plot a stefan2p snapshot: interface shape and temperature on the reference annulus."""

import argparse
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def height(triples, theta):
    # real height: h = Re c0 + 2 sum_k Re(c_k e^{ik theta})
    h = np.zeros_like(theta)
    for k, re, im in triples:
        c = complex(re, im)
        w = 1.0 if int(k) == 0 else 2.0
        h += w * (c * np.exp(1j * int(k) * theta)).real
    return h


def phase_mesh(ph):
    n_r, n_t = ph["n_r"], ph["n_theta"]
    q = np.asarray(ph["q"]).reshape(n_r, n_t)
    theta = 2 * np.pi * np.arange(n_t + 1) / n_t
    q = np.concatenate([q, q[:, :1]], axis=1)
    return np.asarray(ph["r"]), theta, q


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("snapshot")
    ap.add_argument("-o", "--out", default="snapshot.png")
    ap.add_argument("--scale", type=float, default=1.0, help="exaggerate the height by this factor")
    args = ap.parse_args()

    with open(args.snapshot) as f:
        s = json.load(f)

    theta = np.linspace(0, 2 * np.pi, 721)
    fig = plt.figure(figsize=(11, 5))

    ax = fig.add_subplot(1, 2, 1)
    for key, style, label in [("h0", "--", "initial"), ("h", "-", f"t = {s['t']:.4g}")]:
        r = s["r_gamma"] + args.scale * height(s[key], theta)
        ax.plot(r * np.cos(theta), r * np.sin(theta), style, label=label)
    ref = s["r_gamma"] * np.ones_like(theta)
    ax.plot(ref * np.cos(theta), ref * np.sin(theta), ":", color="gray", label="reference")
    ax.set_aspect("equal")
    ax.legend(loc="upper right")
    ax.set_title("interface" + (f" (height x{args.scale:g})" if args.scale != 1.0 else ""))

    ax = fig.add_subplot(1, 2, 2, projection="polar")
    lim = max(np.abs(np.asarray(s[p]["q"])).max() for p in ("minus", "plus")) or 1.0
    for p in ("minus", "plus"):
        r, th, q = phase_mesh(s[p])
        tt, rr = np.meshgrid(th, r)
        mesh = ax.pcolormesh(tt, rr, q, shading="gouraud", cmap="RdBu_r", vmin=-lim, vmax=lim)
    fig.colorbar(mesh, ax=ax, shrink=0.8)
    ax.set_title("temperature (reference coordinates)")

    fig.tight_layout()
    fig.savefig(args.out, dpi=120)


if __name__ == "__main__":
    main()
