"""Render settings."""

from __future__ import annotations

from pydantic import Field, model_validator

from autocam_sim.models import GridSpec, ShutterConfig, StrictModel
from autocam_sim.spectral import WavelengthGrid


class RenderConfig(StrictModel):
    """How to render a recipe.

    ``shutter`` and the film size override the recipe's values when set.
    ``preview_scale`` of None picks a scale from the image itself.
    """

    samples_per_pixel: int = Field(default=16, ge=1)
    max_depth: int = Field(default=4, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    shutter: ShutterConfig | None = None
    film_width_px: int | None = Field(default=None, ge=1)
    film_height_px: int | None = Field(default=None, ge=1)
    metadata: bool = True
    grid: GridSpec = Field(default_factory=GridSpec)
    tile_size: int = Field(default=16, ge=1)
    workers: int = Field(default=1, ge=1)
    diffraction: bool = True
    preview_scale: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _film_pair(self) -> RenderConfig:
        if (self.film_width_px is None) != (self.film_height_px is None):
            raise ValueError("film_width_px and film_height_px must be overridden together")
        return self

    @property
    def wavelength_grid(self) -> WavelengthGrid:
        return self.grid.to_grid()
