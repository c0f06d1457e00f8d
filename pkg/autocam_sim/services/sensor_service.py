"""Sensor service: spectral irradiance containers x sensor specs -> digital images."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from autocam_sim.config_loader import PipelineConfig
from autocam_sim.errors import SensorSpecError
from autocam_sim.sceneformat.spectral_container import read_spectral_image
from autocam_sim.sensor.pixel_model import SensorResponse, simulate
from autocam_sim.sensor.sensor_io import sidecar_path, write_sensor_image
from autocam_sim.sensor.spec import SensorSpec, load_sensor_spec
from autocam_sim.utils.batch_runner import BatchResult, BatchRunner
from autocam_sim.utils.paths import RunPaths
from autocam_sim.utils.seeds import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SensorOutput:
    scene_id: str
    sensor: str
    image_path: Path
    sidecar_path: Path


class SensorService:
    """Service for digitizing irradiance images with one or more sensors."""

    def __init__(self, config: PipelineConfig, run_paths: RunPaths) -> None:
        """Initialize sensor service.

        Args:
            config: Pipeline configuration
            run_paths: Output layout of the run
        """
        self._config = config
        self._run_paths = run_paths

    def load_specs(self, references: Sequence[str] | None = None) -> list[SensorSpec]:
        """Load sensor specs by path or bundled name (defaults to the configured list).

        Raises:
            SensorSpecError: unreadable or invalid spec, or two specs with one name
        """
        refs = list(self._config.sensors if references is None else references)
        specs = []
        for ref in refs:
            try:
                specs.append(load_sensor_spec(ref, self._config.base_dir))
            except FileNotFoundError as e:
                raise SensorSpecError(str(e)) from e
        names = [s.name for s in specs]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise SensorSpecError(f"sensor names must be unique, repeated: {', '.join(duplicates)}")
        return specs

    def load_responses(self, specs: Sequence[SensorSpec]) -> dict[str, SensorResponse]:
        """Resolve the QE and CFA spectra of every spec, keyed by sensor name.

        Raises:
            SensorSpecError: naming the sensor whose filter data is missing or invalid
        """
        responses = {}
        for spec in specs:
            try:
                responses[spec.name] = SensorResponse.from_spec(spec)
            except (SensorSpecError, OSError, ValueError) as e:
                raise SensorSpecError(f"sensor '{spec.name}': {e}") from e
        return responses

    def simulate(
        self,
        image_paths: Sequence[Path],
        specs: Sequence[SensorSpec],
        responses: dict[str, SensorResponse] | None = None,
    ) -> BatchResult:
        """Simulate every (image, sensor) pair.

        The noise seed of a pair is derived from the master seed and the
        scene id, so sensors compared on one scene see the same seed. A pair
        whose image and sensor disagree in size or wavelength grid fails on
        its own.

        Args:
            image_paths: spectral containers to digitize
            specs: sensors to simulate
            responses: resolved filter data from :meth:`load_responses`

        Returns:
            Batch result whose values are :class:`SensorOutput`

        Raises:
            SensorSpecError: when responses are not given and a spec's filter data cannot be read
        """
        if responses is None:
            responses = self.load_responses(specs)
        pairs = list(itertools.product([Path(p) for p in image_paths], specs))
        ids = [f"{path.stem}/{spec.name}" for path, spec in pairs]

        def run_pair(pair: tuple[Path, SensorSpec]) -> SensorOutput:
            path, spec = pair
            sid = path.stem
            img = read_spectral_image(path)
            seeded = spec.model_copy(update={"noise_seed": derive_seed(self._config.seed, "sensor", sid)})
            image = simulate(img, seeded, response=responses[spec.name])
            out = write_sensor_image(image, self._run_paths.sensor_file(spec.name, sid))
            return SensorOutput(sid, spec.name, out, sidecar_path(out))

        return BatchRunner("sensor", self._config.jobs).run(run_pair, pairs, ids)
