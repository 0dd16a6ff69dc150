from .patches import PatchBatch, PatchSpec, ray_budget_table, rays_per_pixel, sample_batch

__all__ = ["PatchBatch", "PatchSpec", "ray_budget_table", "rays_per_pixel", "sample_batch"]
