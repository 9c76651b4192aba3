from collections import Counter
from pathlib import Path
from typing import Any

from core.chain_modes import read_ciphertext, write_plaintext
from core.cipher_core import CipherFamily, permutation_for, read_key
from core.container_format import read_stream, write_stream
from core.pec_pipeline import compress, decode
from core.protocol_definitions import CompressData, CompressParams, DecodeData, DecodeParams
from core.sw_codec import load_codec
from tools.base_tool import BaseTool, Handler


class PipelineTool(BaseTool):
    """
    Keyless compression of CBC/OFB/CFB ciphertext files into PEC1 containers, and joint
    decryption-decoding back to plaintext.
    """

    def __init__(self, config: dict[str, Any] | None = None):
        super().__init__("pipeline", config)

    def handlers(self) -> dict[str, Handler]:
        return {
            "compress": (CompressParams, self._handle_compress),
            "decode": (DecodeParams, self._handle_decode),
        }

    async def _handle_compress(self, params: CompressParams) -> CompressData:
        codec = load_codec(params.codec_path)
        ct = read_ciphertext(params.input_path, params.mode, params.width)
        cs = await self.run_blocking(compress, ct, codec)
        write_stream(params.output_path, cs)
        input_bytes = Path(params.input_path).stat().st_size
        output_bytes = Path(params.output_path).stat().st_size
        self.logger.info(f"Compressed {input_bytes} bytes of {params.mode.name} ciphertext to {output_bytes} bytes")
        return CompressData(
            output_path=params.output_path,
            mode=params.mode.name,
            n_blocks=cs.n_blocks,
            payload_bits=cs.payload_bit_length,
            input_bytes=input_bytes,
            output_bytes=output_bytes,
        )

    async def _handle_decode(self, params: DecodeParams) -> DecodeData:
        cs = read_stream(params.input_path)
        codec = load_codec(params.codec_path, params.max_iterations, params.decoder, params.check_rule)
        width = 128 if params.family == CipherFamily.AES128 else params.width or cs.width
        cipher = permutation_for(read_key(params.key_path, params.family, width))
        result = await self.run_blocking(decode, cs, cipher, codec, params.p)
        statuses = Counter(status.value for status in result.statuses)
        if result.succeeded:
            write_plaintext(params.output_path, result.plaintext)
            self.logger.info(f"Recovered {cs.n_blocks} block(s) to {params.output_path}")
            output_path = params.output_path
        else:
            self.logger.warning(f"Decoding stopped at block {result.failed_block_index}; no plaintext written")
            output_path = None
        return DecodeData(
            output_path=output_path,
            succeeded=result.succeeded,
            failed_block_index=result.failed_block_index,
            block_statuses=dict(statuses),
        )
