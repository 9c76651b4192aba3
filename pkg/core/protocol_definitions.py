import logging
from typing import Annotated, Any

from pydantic import AfterValidator, BaseModel, Field, field_validator, model_validator

from core.chain_modes import Mode
from core.cipher_core import CipherFamily
from core.sw_codec import DISTRIBUTIONS, CheckRule, DecoderKind

logger = logging.getLogger(__name__)


def _known_distribution(dist: str) -> str:
    if dist not in DISTRIBUTIONS:
        raise ValueError(f"unknown degree distribution '{dist}', expected one of {sorted(DISTRIBUTIONS)}")
    return dist


DistributionId = Annotated[str, AfterValidator(_known_distribution)]


class ToolRequest(BaseModel):
    "Base class for all tool requests."

    tool_name: str = Field(..., description="The name of the tool to execute.")
    action: str = Field(..., description="The specific action to perform.")
    params: dict[str, Any] = Field(default_factory=dict, description="Parameters for the action.")
    context: dict[str, Any] | None = Field(None, description="Optional context for the action.")


class ToolResponse(BaseModel):
    "Base class for all tool responses."

    status: str = Field(..., description="Status of the tool action (e.g., success, error)")
    data: dict[str, Any] | None = Field(None, description="Data payload if the action was successful.")
    error_message: str | None = Field(None, description="Error message if the action failed.")


class ModeSelection(BaseModel):
    "Chaining mode, given by name ('cbc') or by its container byte."

    mode: Mode = Mode.CBC

    @field_validator("mode", mode="before")
    @classmethod
    def _parse_mode(cls, value: Any) -> Any:
        if isinstance(value, str) and not value.isdigit():
            try:
                return Mode[value.upper()]
            except KeyError as e:
                raise ValueError(f"unknown mode '{value}'") from e
        return value


class CipherSelection(BaseModel):
    "Which permutation a key file drives."

    family: CipherFamily = Field(CipherFamily.AES128, description="Cipher family of the key.")
    width: int | None = Field(None, description="Block width; fixed at 128 for AES, 4-32 for the toy cipher.")


# cipher tool


class KeygenParams(CipherSelection):
    "Parameters for the 'keygen' action of CipherTool."

    output_path: str
    seed: int | None = Field(None, description="Seed for a reproducible key; OS randomness when absent.")


class KeygenData(BaseModel):
    key_path: str
    family: CipherFamily
    width: int


class EncryptParams(CipherSelection, ModeSelection):
    "Parameters for the 'encrypt' and 'decrypt' actions of CipherTool."

    key_path: str
    input_path: str
    output_path: str
    iv_hex: str | None = Field(None, description="Explicit IV; drawn at random when absent.")
    seed: int | None = Field(None, description="Seed for the IV generator.")


class EncryptData(BaseModel):
    output_path: str
    mode: str
    n_blocks: int
    iv_hex: str | None = None


# codec tool


class ConstructCodeParams(BaseModel):
    "Parameters for the 'construct_code' action of CodecTool."

    m: int = Field(..., ge=2, description="Variable nodes, i.e. block width.")
    rate: float = Field(..., gt=0, lt=1, description="Compression rate n_checks/m.")
    dist: DistributionId = Field("r05", description="Degree distribution id.")
    seed: int = Field(0, ge=0, description="PEG seed.")
    output_path: str
    compute_girth: bool = False


class ConstructCodeData(BaseModel):
    alist_path: str
    descriptor_path: str
    m: int
    n_checks: int
    design_rate: float
    girth: int | None = None
    digest: str


class CodecSource(BaseModel):
    "Either an alist file or the parameters to grow a PEG code on the fly."

    codec_path: str | None = None
    m: int | None = Field(None, ge=2)
    rate: float | None = Field(None, gt=0, lt=1)
    dist: DistributionId = "r05"
    code_seed: int = 0
    max_iterations: int = Field(100, ge=1)
    check_rule: CheckRule = CheckRule.TANH
    decoder: DecoderKind = DecoderKind.BP

    @model_validator(mode="after")
    def _one_source(self) -> "CodecSource":
        if self.codec_path is None and (self.m is None or self.rate is None):
            raise ValueError("give codec_path, or both m and rate")
        return self


# pipeline tool


class CompressParams(ModeSelection):
    "Parameters for the 'compress' action of PipelineTool."

    codec_path: str
    input_path: str = Field(..., description="Raw ciphertext file, IV first.")
    width: int = Field(128, ge=8)
    output_path: str


class CompressData(BaseModel):
    output_path: str
    mode: str
    n_blocks: int
    payload_bits: int
    input_bytes: int
    output_bytes: int


class DecodeParams(CipherSelection):
    "Parameters for the 'decode' action of PipelineTool."

    input_path: str = Field(..., description="PEC1 container.")
    codec_path: str
    key_path: str
    p: float = Field(..., ge=0, lt=0.5, description="Source bit probability.")
    output_path: str
    max_iterations: int = Field(100, ge=1)
    check_rule: CheckRule = CheckRule.TANH
    decoder: DecoderKind = DecoderKind.BP


class DecodeData(BaseModel):
    output_path: str | None = None
    succeeded: bool
    failed_block_index: int | None = None
    block_statuses: dict[str, int]


# bench tool


class BenchConfig(BaseModel):
    "Trial budget shared by every bench action: frames per p value against the FER it has to certify."

    target_fer: float = Field(1e-3, gt=0, lt=1)
    trials: int = Field(..., ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _warn_short_runs(self) -> "BenchConfig":
        if self.trials < 100 / self.target_fer:
            logger.warning(
                f"{self.trials} trials is below 100/target_fer = {100 / self.target_fer:.0f}; "
                "upper bounds will be loose"
            )
        return self


class FerParams(CodecSource, BenchConfig):
    "Parameters for the 'fer' action of BenchTool."

    p_grid: list[float] = Field(..., min_length=1)
    csv_path: str | None = None

    @field_validator("p_grid")
    @classmethod
    def _grid_in_range(cls, grid: list[float]) -> list[float]:
        if any(not 0 <= p < 0.5 for p in grid):
            raise ValueError("every p must lie in [0, 0.5)")
        return grid


class MaxPParams(CodecSource, BenchConfig):
    "Parameters for the 'maxp' action of BenchTool."

    resolution: float = Field(0.001, gt=0, lt=0.5)


class MinRateParams(BenchConfig):
    "Parameters for the 'minrate' action of BenchTool."

    m: int = Field(..., ge=2)
    p: float = Field(..., ge=0, lt=0.5)
    rates: list[float] = Field(..., min_length=1)
    dist: DistributionId = "r05"


class TablesParams(BaseModel):
    "Parameters for the 'tables' action of BenchTool."

    long: bool = False
    trials: int | None = Field(None, ge=1, description="Frames per p value; 20/target when absent.")
    seed: int = 0
    widths: list[int] = Field(default_factory=lambda: [128, 1024])
    csv_path: str | None = None
    markdown_path: str | None = None


class BenchData(BaseModel):
    rows: list[dict[str, Any]] | None = None
    p_star: float | None = None
    entropy: float | None = None
    rate: str | None = None
    markdown: str | None = None


# ecb lab tool


class EcbLabParams(BaseModel):
    "Parameters for the 'strat1', 'strat2', 'strat1-keys' and 'collision' actions of EcbLabTool."

    support_size: int = Field(..., ge=1, description="N, size of the uniform plaintext support.")
    t: int = Field(..., ge=1, description="Kept ciphertext prefix length.")
    m: int = Field(24, ge=4, le=32, description="Toy cipher block width.")
    trials: int = Field(..., ge=1)
    seed: int = 0
    csv_path: str | None = None

    @model_validator(mode="after")
    def _prefix_fits(self) -> "EcbLabParams":
        if self.t > self.m:
            raise ValueError(f"t={self.t} exceeds m={self.m}")
        if self.support_size > 1 << self.m:
            raise ValueError(f"a support of {self.support_size} does not fit in {self.m} bits")
        return self


class EcbLabData(BaseModel):
    summary: dict[str, float]
    csv_path: str | None = None
