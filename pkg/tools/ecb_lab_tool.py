from typing import Any

from core.ecb_lab import (
    CollisionEstimate,
    collision_probability,
    strategy1_experiment,
    strategy1_wrong_key_rate,
    strategy2_experiment,
)
from core.protocol_definitions import EcbLabData, EcbLabParams
from tools.base_tool import BaseTool, Handler


class EcbLabTool(BaseTool):
    "Exhaustive-decoding and truncation-collision experiments on the toy cipher."

    def __init__(self, config: dict[str, Any] | None = None):
        super().__init__("ecb_lab", config)

    def handlers(self) -> dict[str, Handler]:
        return {
            "strat1": (EcbLabParams, self._handle_strat1),
            "strat2": (EcbLabParams, self._handle_strat2),
            "strat1-keys": (EcbLabParams, self._handle_strat1_keys),
            "collision": (EcbLabParams, self._handle_collision),
        }

    async def _run_strategy(self, experiment, params: EcbLabParams) -> EcbLabData:
        frame = await self.run_blocking(experiment, params.support_size, params.t, params.m, params.trials, params.seed)
        if params.csv_path:
            frame.to_csv(params.csv_path, index=False)
            self.logger.info(f"Wrote {len(frame)} trials to {params.csv_path}")
        summary = {
            "mean_queries": float(frame["queries"].mean()),
            "recovered_rate": float(frame["recovered"].mean()),
            "wrong_plaintext_rate": float((frame["recovered"] & ~frame["correct"]).mean()),
            "guessing_entropy": (params.support_size + 1) / 2,
        }
        return EcbLabData(summary=summary, csv_path=params.csv_path)

    @staticmethod
    def _estimate_data(estimate: CollisionEstimate) -> EcbLabData:
        return EcbLabData(
            summary={
                "monte_carlo": estimate.monte_carlo,
                "closed_form": estimate.closed_form,
                "collisions": float(estimate.collisions),
                "trials": float(estimate.trials),
            }
        )

    async def _handle_strat1(self, params: EcbLabParams) -> EcbLabData:
        return await self._run_strategy(strategy1_experiment, params)

    async def _handle_strat2(self, params: EcbLabParams) -> EcbLabData:
        return await self._run_strategy(strategy2_experiment, params)

    async def _handle_strat1_keys(self, params: EcbLabParams) -> EcbLabData:
        estimate = await self.run_blocking(
            strategy1_wrong_key_rate, params.support_size, params.t, params.m, params.trials, params.seed
        )
        return self._estimate_data(estimate)

    async def _handle_collision(self, params: EcbLabParams) -> EcbLabData:
        estimate = await self.run_blocking(
            collision_probability, params.support_size, params.t, params.trials, params.seed, params.m
        )
        return self._estimate_data(estimate)
