import argparse
import asyncio
import json
import logging
import sys
from collections.abc import Sequence
from typing import Any

from core.config_loader import get_section, get_setting, load_configurations
from core.logging_config import parse_log_level, setup_logging
from core.protocol_definitions import ToolRequest, ToolResponse
from tools.base_tool import BaseTool
from tools.bench_tool import BenchTool
from tools.cipher_tool import CipherTool
from tools.codec_tool import CodecTool
from tools.ecb_lab_tool import EcbLabTool
from tools.pipeline_tool import PipelineTool

logger = logging.getLogger("MainApp")

TOOLS: dict[str, tuple[type[BaseTool], str]] = {
    "cipher": (CipherTool, "CipherTool"),
    "codec": (CodecTool, "CodecTool"),
    "pipeline": (PipelineTool, "PipelineTool"),
    "bench": (BenchTool, "BenchTool"),
    "ecb_lab": (EcbLabTool, "EcbLabTool"),
}


def _cipher_args(parser: argparse.ArgumentParser):
    parser.add_argument("--cipher", dest="family", choices=["aes128", "toy"], default="aes128")
    parser.add_argument("--width", type=int, default=None, help="Toy cipher block width (4-32).")


def _decoder_args(parser: argparse.ArgumentParser):
    "Left unset, these fall back to the [CodecTool] settings."
    parser.add_argument("--max-iterations", type=int, default=None)
    parser.add_argument("--check-rule", choices=["tanh", "min-sum"], default=None)


def _codec_args(parser: argparse.ArgumentParser):
    parser.add_argument("--codec", dest="codec_path", help="alist file of the code.")
    parser.add_argument("--m", type=int, help="Block width when growing a code on the fly.")
    parser.add_argument("--rate", type=float, help="Rate when growing a code on the fly.")
    parser.add_argument("--dist", choices=["r05", "r075"], default="r05")
    parser.add_argument("--code-seed", type=int, default=0)
    _decoder_args(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pec", description="Post-encryption compression of chained ciphertexts.")
    parser.add_argument("--config", default="config/main_config.ini")
    sub = parser.add_subparsers(dest="command", required=True)

    keygen = sub.add_parser("keygen", help="Write a fresh hex key file.")
    _cipher_args(keygen)
    keygen.add_argument("--out", required=True)
    keygen.add_argument("--seed", type=int)

    for name in ("encrypt", "decrypt"):
        cmd = sub.add_parser(name, help=f"{name.capitalize()} a whole file.")
        _cipher_args(cmd)
        cmd.add_argument("--mode", choices=["ecb", "cbc", "ofb", "cfb"], default="cbc")
        cmd.add_argument("--key", required=True)
        cmd.add_argument("--in", dest="input_path", required=True)
        cmd.add_argument("--out", required=True)
        if name == "encrypt":
            cmd.add_argument("--iv", help="IV as hex; random when absent.")
            cmd.add_argument("--seed", type=int)

    construct = sub.add_parser("construct-code", help="Grow a PEG code and save it as alist.")
    construct.add_argument("--m", type=int, required=True)
    construct.add_argument("--rate", type=float, required=True)
    construct.add_argument("--dist", choices=["r05", "r075"], default="r05")
    construct.add_argument("--seed", type=int, default=0)
    construct.add_argument("--out", required=True)
    construct.add_argument("--girth", action="store_true", help="Also report the girth of the graph.")

    compress = sub.add_parser("compress", help="Compress a ciphertext file without the key.")
    compress.add_argument("--codec", dest="codec_path", required=True)
    compress.add_argument("--mode", choices=["cbc", "ofb", "cfb"], default="cbc")
    compress.add_argument("--width", type=int, default=128)
    compress.add_argument("--in", dest="input_path", required=True)
    compress.add_argument("--out", required=True)

    decode = sub.add_parser("decode", help="Jointly decode and decrypt a PEC1 container.")
    _cipher_args(decode)
    decode.add_argument("--codec", dest="codec_path", required=True)
    decode.add_argument("--key", required=True)
    decode.add_argument("--p", type=float, required=True)
    decode.add_argument("--in", dest="input_path", required=True)
    decode.add_argument("--out", required=True)
    _decoder_args(decode)
    decode.add_argument("--decoder", choices=["bp", "ml"], default="bp")

    bench = sub.add_parser("bench", help="Monte-Carlo FER benchmarks.")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    fer = bench_sub.add_parser("fer")
    _codec_args(fer)
    fer.add_argument("--p", type=float, nargs="+", required=True)
    fer.add_argument("--trials", type=int, default=20_000)
    fer.add_argument("--seed", type=int, default=0)
    fer.add_argument("--csv")
    maxp = bench_sub.add_parser("maxp")
    _codec_args(maxp)
    maxp.add_argument("--target", type=float, default=1e-3)
    maxp.add_argument("--trials", type=int, default=20_000)
    maxp.add_argument("--seed", type=int, default=0)
    maxp.add_argument("--resolution", type=float, default=0.001)
    minrate = bench_sub.add_parser("minrate")
    minrate.add_argument("--m", type=int, required=True)
    minrate.add_argument("--p", type=float, required=True)
    minrate.add_argument("--target", type=float, default=1e-3)
    minrate.add_argument("--rates", type=float, nargs="+", required=True)
    minrate.add_argument("--dist", choices=["r05", "r075"], default="r05")
    minrate.add_argument("--trials", type=int, default=20_000)
    minrate.add_argument("--seed", type=int, default=0)
    tables = bench_sub.add_parser("tables")
    tables.add_argument("--long", action="store_true", help="Also measure the 1e-4 rows.")
    tables.add_argument("--trials", type=int)
    tables.add_argument("--seed", type=int, default=0)
    tables.add_argument("--widths", type=int, nargs="+", default=[128, 1024])
    tables.add_argument("--csv")
    tables.add_argument("--markdown")

    lab = sub.add_parser("ecb-lab", help="ECB exhaustive-strategy experiments on the toy cipher.")
    lab_sub = lab.add_subparsers(dest="lab_command", required=True)
    for name in ("strat1", "strat2", "strat1-keys", "collision"):
        cmd = lab_sub.add_parser(name)
        cmd.add_argument("--N", dest="support_size", type=int, required=True)
        cmd.add_argument("--t", type=int, required=True)
        cmd.add_argument("--m", type=int, default=None)
        cmd.add_argument("--trials", type=int, default=None)
        cmd.add_argument("--seed", type=int, default=0)
        cmd.add_argument("--csv")
    return parser


def _codec_params(args: argparse.Namespace) -> dict[str, Any]:
    return {
        "codec_path": args.codec_path,
        "m": args.m,
        "rate": args.rate,
        "dist": args.dist,
        "code_seed": args.code_seed,
        "max_iterations": args.max_iterations,
        "check_rule": args.check_rule,
    }


def request_from_args(args: argparse.Namespace) -> ToolRequest:
    "Maps a parsed command line onto the tool request that serves it."
    cmd = args.command
    if cmd == "keygen":
        params = {"family": args.family, "width": args.width, "output_path": args.out, "seed": args.seed}
        return ToolRequest(tool_name="cipher", action="keygen", params=params)
    if cmd in ("encrypt", "decrypt"):
        params = {
            "family": args.family,
            "width": args.width,
            "mode": args.mode,
            "key_path": args.key,
            "input_path": args.input_path,
            "output_path": args.out,
        }
        if cmd == "encrypt":
            params.update(iv_hex=args.iv, seed=args.seed)
        return ToolRequest(tool_name="cipher", action=cmd, params=params)
    if cmd == "construct-code":
        params = {
            "m": args.m,
            "rate": args.rate,
            "dist": args.dist,
            "seed": args.seed,
            "output_path": args.out,
            "compute_girth": args.girth,
        }
        return ToolRequest(tool_name="codec", action="construct_code", params=params)
    if cmd == "compress":
        params = {
            "codec_path": args.codec_path,
            "mode": args.mode,
            "width": args.width,
            "input_path": args.input_path,
            "output_path": args.out,
        }
        return ToolRequest(tool_name="pipeline", action="compress", params=params)
    if cmd == "decode":
        params = {
            "family": args.family,
            "width": args.width,
            "codec_path": args.codec_path,
            "key_path": args.key,
            "p": args.p,
            "input_path": args.input_path,
            "output_path": args.out,
            "max_iterations": args.max_iterations,
            "check_rule": args.check_rule,
            "decoder": args.decoder,
        }
        return ToolRequest(tool_name="pipeline", action="decode", params=params)
    if cmd == "bench":
        action = args.bench_command
        if action == "fer":
            params = {**_codec_params(args), "p_grid": args.p, "trials": args.trials, "seed": args.seed}
            params["csv_path"] = args.csv
        elif action == "maxp":
            params = {
                **_codec_params(args),
                "target_fer": args.target,
                "trials": args.trials,
                "seed": args.seed,
                "resolution": args.resolution,
            }
        elif action == "minrate":
            params = {
                "m": args.m,
                "p": args.p,
                "target_fer": args.target,
                "rates": args.rates,
                "dist": args.dist,
                "trials": args.trials,
                "seed": args.seed,
            }
        else:
            params = {
                "long": args.long,
                "trials": args.trials,
                "seed": args.seed,
                "widths": args.widths,
                "csv_path": args.csv,
                "markdown_path": args.markdown,
            }
        return ToolRequest(tool_name="bench", action=action, params=params)
    params = {
        "support_size": args.support_size,
        "t": args.t,
        "m": args.m,
        "trials": args.trials,
        "seed": args.seed,
        "csv_path": args.csv,
    }
    return ToolRequest(tool_name="ecb_lab", action=args.lab_command, params=params)


async def dispatch(request: ToolRequest) -> ToolResponse:
    tool_cls, section = TOOLS[request.tool_name]
    tool = tool_cls(config=get_section(section))
    return await tool.execute(request)


def exit_status(response: ToolResponse) -> int:
    if response.status != "success":
        return 1
    if response.data is not None and response.data.get("succeeded") is False:
        return 2
    return 0


def run(argv: Sequence[str] | None = None, configure_logging: bool = False) -> int:
    args = build_parser().parse_args(argv)
    load_configurations(args.config)
    if configure_logging:
        log_level = parse_log_level(get_setting("General", "log_level", default="INFO"))
        setup_logging(log_level, log_dir=get_setting("General", "log_dir", default="logs"))
        logger.info(f"Application Name from config: {get_setting('General', 'app_name', default='PecToolkit')}")
    if getattr(args, "max_iterations", 0) is None:
        args.max_iterations = get_setting("CodecTool", "max_iterations", 100, is_int=True)
    if getattr(args, "check_rule", "") is None:
        args.check_rule = get_setting("CodecTool", "check_rule", "tanh")
    if args.command == "ecb-lab":
        if args.m is None:
            args.m = get_setting("EcbLabTool", "default_width", 24, is_int=True)
        if args.trials is None:
            args.trials = get_setting("EcbLabTool", "trials", 1000, is_int=True)
    request = request_from_args(args)
    response = asyncio.run(dispatch(request))
    if response.status == "success":
        markdown = (response.data or {}).pop("markdown", None)
        print(markdown if markdown else json.dumps(response.data, indent=2, default=str))
    else:
        logger.error(response.error_message)
    return exit_status(response)


if __name__ == "__main__":
    try:
        sys.exit(run(configure_logging=True))
    except KeyboardInterrupt:
        logger.info("Interrupted by user. Exiting...")
        sys.exit(130)
