from typing import Any

from core.protocol_definitions import ConstructCodeData, ConstructCodeParams
from core.sw_codec import DISTRIBUTIONS, SyndromeCodec, build_codec, design_rate, save_codec
from tools.base_tool import BaseTool, Handler


class CodecTool(BaseTool):
    "Grows PEG parity-check matrices and stores them as alist files with a JSON descriptor."

    def __init__(self, config: dict[str, Any] | None = None):
        super().__init__("codec", config)

    def handlers(self) -> dict[str, Handler]:
        return {"construct_code": (ConstructCodeParams, self._handle_construct_code)}

    async def _handle_construct_code(self, params: ConstructCodeParams) -> ConstructCodeData:
        self.logger.info(f"Growing {params.dist} code: m={params.m}, rate={params.rate}, seed={params.seed}")
        codec: SyndromeCodec = await self.run_blocking(build_codec, params.m, params.rate, params.dist, params.seed)
        descriptor_path = save_codec(codec, params.output_path)
        girth = await self.run_blocking(codec.matrix.girth) if params.compute_girth else None
        if girth is not None:
            self.logger.info(f"Girth of the constructed graph: {girth}")
        return ConstructCodeData(
            alist_path=params.output_path,
            descriptor_path=str(descriptor_path),
            m=codec.width,
            n_checks=codec.n_checks,
            design_rate=design_rate(DISTRIBUTIONS[params.dist]),
            girth=girth,
            digest=codec.digest().hex(),
        )
