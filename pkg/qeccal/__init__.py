"""
qeccal package
"""
__all__ = [
    "config",
    "logging_utils",
    "cli_paths",
    "code_model",
    "frames",
    "catalog",
    "noise_sim",
    "correlation_inference",
    "matching_graph",
    "decoder",
    "diagnostics",
    "dataset_io",
    "model_io",
    "export_csv",
    "manifest",
    "cli",
]
