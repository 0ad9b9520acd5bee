import os

import numpy as np

import cli
import utils
from engine import W3


def initialize_data_files(data_dir="data", settings=None):
    """Write the exact-mode reference tables if they don't exist

    Args:
        data_dir: target directory, created when missing
        settings: resolved settings (threads, ...); defaults when None

    Returns:
        list of paths written in this call
    """
    # Create data directory if it doesn't exist
    if not os.path.exists(data_dir):
        os.makedirs(data_dir)

    settings = settings or utils.initialize_settings()
    etas = np.linspace(-0.9, 0.9, 19)
    qs = np.linspace(0.0, 1.0, 11)
    written = []

    # Work difference between rho_1 and rho_2
    path = os.path.join(data_dir, "fig3.csv")
    if not os.path.exists(path):
        utils.export_table(cli.cmd_fig3(np.linspace(-1.0, 1.0, 41), 'exact', settings), path)
        written.append(path)

    # Violation maps and boundary curves of W_3 for both mixed families
    for family in ("werner", "gibbs_invariant"):
        path = os.path.join(data_dir, f"fig4_map_{family}_w3.csv")
        if os.path.exists(path):
            continue
        table, boundary = cli.cmd_fig4_map(family, W3, etas, qs, settings)
        utils.export_table(table, path)
        boundary_path = os.path.join(data_dir, f"fig4_boundary_{family}_w3.csv")
        utils.export_table(boundary, boundary_path)
        written.extend([path, boundary_path])

    return written
