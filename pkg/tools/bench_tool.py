from collections.abc import Callable, Iterator
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import contextmanager
from fractions import Fraction
from typing import Any, TypeVar

from core.fer_bench import (
    DEFAULT_CHUNK_SIZE,
    TableRun,
    fer_curve,
    max_p_search,
    min_rate_search,
    reproduce_tables,
    write_report,
)
from core.protocol_definitions import BenchData, CodecSource, FerParams, MaxPParams, MinRateParams, TablesParams
from core.source_models import binary_entropy
from core.sw_codec import SyndromeCodec, build_codec, load_codec
from tools.base_tool import BaseTool, Handler

T = TypeVar("T")


class BenchTool(BaseTool):
    """
    Monte-Carlo FER benchmarks. With `workers` > 1 in the [BenchTool] config section the
    trial chunks are spread over a process pool; results do not depend on the worker count.
    """

    def __init__(self, config: dict[str, Any] | None = None):
        super().__init__("bench", config)
        self.workers = self.config_value("workers", 1)
        self.chunk_size = self.config_value("chunk_size", DEFAULT_CHUNK_SIZE)
        self.confidence = self.config_value("confidence", 0.95)

    def handlers(self) -> dict[str, Handler]:
        return {
            "fer": (FerParams, self._handle_fer),
            "maxp": (MaxPParams, self._handle_maxp),
            "minrate": (MinRateParams, self._handle_minrate),
            "tables": (TablesParams, self._handle_tables),
        }

    @contextmanager
    def _pool(self) -> Iterator[Executor | None]:
        if self.workers <= 1:
            yield None
            return
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            self.logger.debug(f"Running trial chunks on {self.workers} worker processes")
            yield pool

    async def _pooled(self, fn: Callable[[Executor | None], T]) -> T:
        def run() -> T:
            with self._pool() as pool:
                return fn(pool)

        return await self.run_blocking(run)

    def _codec(self, source: CodecSource) -> SyndromeCodec:
        if source.codec_path is not None:
            return load_codec(source.codec_path, source.max_iterations, source.decoder, source.check_rule)
        codec = build_codec(
            source.m, source.rate, source.dist, source.code_seed, source.max_iterations, source.check_rule
        )
        self.logger.info(f"Built {source.dist} code {codec.width}x{codec.n_checks} (seed {source.code_seed})")
        return codec

    async def _handle_fer(self, params: FerParams) -> BenchData:
        codec = await self.run_blocking(self._codec, params)
        frame = await self._pooled(
            lambda pool: fer_curve(
                codec,
                params.p_grid,
                params.trials,
                params.seed,
                confidence=self.confidence,
                chunk_size=self.chunk_size,
                executor=pool,
            )
        )
        if params.csv_path:
            write_report(frame, csv_path=params.csv_path)
        return BenchData(rows=frame.to_dict(orient="records"), markdown=write_report(frame))

    async def _handle_maxp(self, params: MaxPParams) -> BenchData:
        codec = await self.run_blocking(self._codec, params)
        p_star = await self._pooled(
            lambda pool: max_p_search(
                codec,
                params.target_fer,
                params.trials,
                params.seed,
                resolution=params.resolution,
                confidence=self.confidence,
                chunk_size=self.chunk_size,
                executor=pool,
            )
        )
        return BenchData(p_star=p_star, entropy=round(binary_entropy(p_star), 4))

    async def _handle_minrate(self, params: MinRateParams) -> BenchData:
        rate: Fraction | None = await self._pooled(
            lambda pool: min_rate_search(
                params.m,
                params.p,
                params.target_fer,
                params.rates,
                params.trials,
                params.seed,
                params.dist,
                chunk_size=self.chunk_size,
                executor=pool,
            )
        )
        if rate is None:
            self.logger.warning(f"No candidate rate met FER {params.target_fer:g} at p={params.p}")
        return BenchData(rate=str(rate) if rate is not None else None, entropy=round(binary_entropy(params.p), 4))

    async def _handle_tables(self, params: TablesParams) -> BenchData:
        def run(pool: Executor | None):
            table_run = TableRun(
                long=params.long,
                trials=params.trials,
                seed=params.seed,
                widths=tuple(params.widths),
                chunk_size=self.chunk_size,
                executor=pool,
            )
            return reproduce_tables(table_run)

        frame = await self._pooled(run)
        markdown = write_report(frame, params.csv_path, params.markdown_path)
        return BenchData(rows=frame.to_dict(orient="records"), markdown=markdown)
