from pathlib import Path
from typing import Any

import numpy as np

from core.chain_modes import decrypt, encrypt, read_ciphertext, read_plaintext, write_ciphertext, write_plaintext
from core.cipher_core import BitBlock, CipherFamily, CipherKey, generate_key, permutation_for, read_key, write_key
from core.protocol_definitions import CipherSelection, EncryptData, EncryptParams, KeygenData, KeygenParams
from tools.base_tool import BaseTool, Handler


class CipherTool(BaseTool):
    """
    Key generation and whole-file encryption under one of the chaining modes.
    Key files are hex; ciphertext files are raw bytes, IV first.
    """

    def __init__(self, config: dict[str, Any] | None = None):
        super().__init__("cipher", config)
        self.default_width = self.config_value("default_width", 16)

    def handlers(self) -> dict[str, Handler]:
        return {
            "keygen": (KeygenParams, self._handle_keygen),
            "encrypt": (EncryptParams, self._handle_encrypt),
            "decrypt": (EncryptParams, self._handle_decrypt),
        }

    def _width(self, params: CipherSelection) -> int:
        if params.family == CipherFamily.AES128:
            return 128
        return params.width or self.default_width

    def _load_key(self, params: EncryptParams) -> CipherKey:
        return read_key(params.key_path, params.family, self._width(params))

    async def _handle_keygen(self, params: KeygenParams) -> KeygenData:
        rng = np.random.default_rng(params.seed) if params.seed is not None else None
        key = generate_key(params.family, self._width(params), rng)
        write_key(params.output_path, key)
        self.logger.info(f"Wrote {key.family} key ({key.width}-bit blocks) to {params.output_path}")
        return KeygenData(key_path=params.output_path, family=key.family, width=key.width)

    async def _handle_encrypt(self, params: EncryptParams) -> EncryptData:
        cipher = permutation_for(self._load_key(params))
        plaintext = read_plaintext(params.input_path, cipher.width)
        iv = BitBlock.from_hex(params.iv_hex, cipher.width) if params.iv_hex else None
        rng = np.random.default_rng(params.seed) if params.seed is not None else None
        ct = await self.run_blocking(encrypt, params.mode, cipher, plaintext, iv, rng)
        write_ciphertext(params.output_path, ct)
        self.logger.info(f"Encrypted {len(plaintext)} block(s) in {params.mode.name} mode to {params.output_path}")
        return EncryptData(
            output_path=params.output_path,
            mode=params.mode.name,
            n_blocks=len(ct),
            iv_hex=ct.iv.hex() if ct.iv is not None else None,
        )

    async def _handle_decrypt(self, params: EncryptParams) -> EncryptData:
        cipher = permutation_for(self._load_key(params))
        ct = read_ciphertext(params.input_path, params.mode, cipher.width)
        plaintext = await self.run_blocking(decrypt, cipher, ct)
        write_plaintext(params.output_path, plaintext)
        self.logger.info(f"Decrypted {len(plaintext)} block(s) from {Path(params.input_path).name}")
        return EncryptData(output_path=params.output_path, mode=params.mode.name, n_blocks=len(plaintext))
