"""
Granger 因果性検定の各コマンドを実行するスクリプト。

    python -m granger_gls.services.run_services test x y --data prices.csv --lag 2
    python -m granger_gls.services.run_services graph --data prices.csv --auto-lag 5 --out-dot g.dot
    python -m granger_gls.services.run_services simulate --scenario m2 --out m2.csv
    python -m granger_gls.services.run_services bench --pairs 10
    python -m granger_gls.services.run_services cov --ar1-phi 0.9 --tau 200 --out omega.csv
"""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

from dotenv import load_dotenv

from granger_gls.common.config import GrangerConfig
from granger_gls.common.counters import counter
from granger_gls.common.dataset import Dataset, export_csv, ingest_csv
from granger_gls.common.errors import GrangerError, InvalidArgumentError, NumericalError
from granger_gls.common.numerics import SymmetricMatrix
from granger_gls.common.storage import LocalStorage
from granger_gls.estimation.autocovariance import (
    WindowSpec,
    ar1_theoretical_autocov,
    band_sign_agreement,
    bartlett_taper,
    relative_frobenius_error,
    sliding_autocov_matrix,
)
from granger_gls.models.schemas import BenchRecord, GraphRecord, TestRecord, render
from granger_gls.services.bench_harness.bench_harness import (
    BenchConfig,
    format_report,
    run_benchmark,
)
from granger_gls.services.causal_graph.causal_graph import AutoLag, CausalGraphBuilder
from granger_gls.services.granger_tests.granger_tests import (
    Method,
    classical_granger_test,
    gls_granger_test_with_covariance,
    tau_for,
)
from granger_gls.services.simulation.simulation import (
    Ar1Config,
    Scenario,
    derive_seeds,
    gen_ar1,
    generate_scenario_pair,
    load_scenario_defaults,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

# バンド上の符号一致率を表示する幅
SIGN_BAND = 10


def _granger_config(args: argparse.Namespace) -> GrangerConfig:
    cfg = GrangerConfig().update(
        alpha=getattr(args, "alpha", None),
        tau_fraction=getattr(args, "tau_frac", None),
        eps_rel=getattr(args, "eps_rel", None),
        reflect=False if getattr(args, "no_reflect", False) else None,
        known_mean=getattr(args, "known_mean", None),
        band=getattr(args, "band", None),
    )
    if cfg.band < 0:
        raise InvalidArgumentError(f"--band must be nonnegative, got {cfg.band}")
    return cfg


def _load_dataset(args: argparse.Namespace) -> Dataset:
    if args.data is None:
        raise InvalidArgumentError("--data is required for this command")
    dataset = ingest_csv(
        args.data,
        has_header=not args.no_header,
        date_column=args.date_column,
        delimiter=args.delimiter,
    )
    if args.diff < 0:
        raise InvalidArgumentError(f"--diff must be nonnegative, got {args.diff}")
    return dataset.differenced(args.diff)


def run_test_command(args: argparse.Namespace) -> int:
    """
    1組の系列について x が y の原因かを検定します。
    """
    cfg = _granger_config(args)
    dataset = _load_dataset(args)
    x, y = dataset.get(args.x_label), dataset.get(args.y_label)
    method = Method(args.method)

    try:
        if method == Method.CLASSICAL_F:
            if args.dump_cov is not None:
                raise InvalidArgumentError("--dump-cov needs --method gls")
            result = classical_granger_test(x, y, args.lag, cfg.alpha)
        else:
            tau = tau_for(len(y) - args.lag, cfg.tau_fraction)
            result, omega = gls_granger_test_with_covariance(
                x,
                y,
                args.lag,
                tau,
                cfg.alpha,
                eps_rel=cfg.eps_rel,
                reflect=cfg.reflect,
                known_mean=cfg.known_mean,
                band=cfg.band,
            )
            if args.dump_cov is not None:
                path = LocalStorage().save_matrix_csv(omega.entries, args.dump_cov)
                logger.info(f"Ω̂ ({omega.dim}×{omega.dim}) を {path} に保存しました")
    except NumericalError:
        counter.increment_failure(method.value)
        raise

    if args.json:
        print(render(TestRecord.from_result(result)))
        return EXIT_OK

    test = result.test
    window = f", tau={result.tau}" if result.tau is not None else ""
    print(f"{result.cause} -> {result.effect} (method={method.value}, lag={result.lag}{window})")
    print(f"F = {test.statistic:.6g}  (df1={test.df1:g}, df2={test.df2:g})")
    print(f"p-value = {test.p_value:.6g}  (alpha={test.alpha:g})")
    print(f"verdict: {result.verdict()}")
    return EXIT_OK


def run_graph_command(args: argparse.Namespace) -> int:
    """
    データセットの全ペアを検定して因果グラフを作ります。
    """
    cfg = _granger_config(args)
    dataset = _load_dataset(args)
    builder = CausalGraphBuilder(
        method=args.method,
        lag=args.lag,
        auto_lag_max=args.auto_lag,
        per_pair_lag=False if args.global_lag else None,
        tau_fraction=args.tau_frac,
        alpha=args.alpha,
        fdr=True if args.fdr else None,
    )
    lag_choice = builder.lag_choice()
    if isinstance(lag_choice, AutoLag):
        mode = "per pair" if lag_choice.per_pair else "global"
        logger.info(f"AIC でラグを選択します (p_max={lag_choice.p_max}, {mode})")

    graph = builder.run(
        dataset.series(),
        eps_rel=cfg.eps_rel,
        reflect=cfg.reflect,
        known_mean=cfg.known_mean,
        band=cfg.band,
        threads=args.threads,
    )
    record = GraphRecord.model_validate(graph.to_record())

    storage = LocalStorage()
    if args.out_dot is not None:
        storage.save_text(graph.to_dot(), args.out_dot)
    if args.out_json is not None:
        storage.save_json(record.model_dump(by_alias=True), args.out_json)

    if args.json:
        print(render(record))
    elif args.out_dot is None:
        print(graph.to_dot(), end="")
    else:
        print(
            f"因果グラフを作成しました: {len(graph.nodes)} ノード, {len(graph.edges)} 辺, "
            f"失敗 {len(graph.diagnostics)} ペア"
        )
    return EXIT_OK


def run_simulate_command(args: argparse.Namespace) -> int:
    """
    シナリオに従って (x, y) を生成し、CSV とメタデータを書き出します。
    """
    x, y, metadata = generate_scenario_pair(Scenario(args.scenario), args.n, args.lag, args.seed)
    path = export_csv(Dataset.from_series([x, y]), args.out)
    meta_path = path.with_suffix(path.suffix + ".meta.json")
    metadata.save(meta_path)
    print(f"{args.scenario} の系列を {path} に保存しました（メタデータ: {meta_path}）")
    return EXIT_OK


def run_bench_command(args: argparse.Namespace) -> int:
    """
    古典的 F 検定と GLS Granger 検定の正解率を比較します。
    """
    scenarios = None
    if args.scenarios is not None:
        scenarios = [s.strip() for s in args.scenarios.split(",") if s.strip()]
    try:
        cfg = BenchConfig.from_toml(
            pairs=args.pairs,
            n=args.n,
            lag_sim=args.lag,
            lag_test=args.lag,
            tau_fraction=args.tau_frac,
            alpha=args.alpha,
            master_seed=args.seed,
            scenarios=scenarios,
        )
    except ValueError as e:
        raise InvalidArgumentError(str(e)) from e

    options = _granger_config(args)
    report = run_benchmark(
        cfg,
        threads=args.threads,
        eps_rel=options.eps_rel,
        known_mean=options.known_mean,
        band=options.band,
        progress=not args.json and sys.stderr.isatty(),
    )
    if args.json:
        print(render(BenchRecord.model_validate(report.to_record())))
    else:
        print(format_report(report))
    return EXIT_OK


def run_cov_command(args: argparse.Namespace) -> int:
    """
    スライディング自己共分散行列 Ω_τ を CSV に書き出します。

    --ar1-phi を指定すると AR(1) 系列を生成し、理論値との誤差も表示します。
    """
    cfg = _granger_config(args)
    if args.ar1_phi is not None:
        defaults = load_scenario_defaults()
        sigma = float(defaults["sigma"])
        (seed,) = derive_seeds(args.seed, 1)
        series = gen_ar1(
            Ar1Config(
                phi=args.ar1_phi,
                n=args.n,
                seed=seed,
                sigma=sigma,
                burn_in=int(defaults["burn_in"]),
            )
        )
    else:
        if args.column is None:
            raise InvalidArgumentError("cov needs --column with --data, or --ar1-phi")
        series = _load_dataset(args).get(args.column)

    tau = args.tau if args.tau is not None else WindowSpec.from_fraction(cfg.tau_fraction, len(series)).tau
    omega = sliding_autocov_matrix(series, tau, reflect=cfg.reflect, known_mean=cfg.known_mean)
    if args.band is not None:
        omega = bartlett_taper(omega, cfg.band)

    storage = LocalStorage()
    path = storage.save_matrix_csv(omega.entries, args.out)
    print(f"Ω_τ ({omega.dim}×{omega.dim}, tau={tau}) を {path} に保存しました")

    if args.ar1_phi is not None:
        reference = ar1_theoretical_autocov(args.ar1_phi, sigma, len(series))
        if not cfg.reflect:
            reference = SymmetricMatrix(reference.entries[tau:, tau:])
        if args.theoretical is not None:
            storage.save_matrix_csv(reference.entries, args.theoretical)
        print(f"relative Frobenius error: {relative_frobenius_error(omega, reference):.4f}")
        print(
            f"relative Frobenius error (|t-t'| <= {SIGN_BAND}): "
            f"{relative_frobenius_error(omega, reference, band=SIGN_BAND):.4f}"
        )
        print(
            f"sign agreement (|t-t'| <= {SIGN_BAND}): "
            f"{band_sign_agreement(omega, reference, SIGN_BAND):.3f}"
        )
    return EXIT_OK


def _add_data_options(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--data", type=str, required=required, help="入力 CSV ファイル")
    parser.add_argument("--date-column", type=str, default=None, help="日付列の名前（計算には使いません）")
    parser.add_argument("--delimiter", type=str, default=",", help="区切り文字 (デフォルト: ,)")
    parser.add_argument("--no-header", action="store_true", help="先頭行をヘッダとして扱いません")
    parser.add_argument("--diff", type=int, default=0, help="差分の階数 (デフォルト: 0)")


def _add_gls_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tau-frac", type=float, default=None, help="窓長 τ の n_eff に対する割合 (デフォルト: 0.2)")
    parser.add_argument("--eps-rel", type=float, default=None, help="Ω̂ の固有値の相対下限 (デフォルト: 1e-8)")
    parser.add_argument("--no-reflect", action="store_true", help="反射による先頭補完を行わず、先頭 τ 行を捨てます")
    _add_covariance_options(parser)


def _add_covariance_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--known-mean", type=float, default=None, help="窓平均の代わりに使う期待値（OLS 残差なら 0）")
    parser.add_argument("--band", type=int, default=None, help="Ω̂ に掛ける Bartlett 重みの帯幅 (デフォルト: 2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="GLS Granger 因果性検定を実行します")
    parser.add_argument("--verbose", action="store_true", help="DEBUG ログを表示します")
    parser.add_argument("--threads", type=int, default=None, help="スレッド数 (デフォルト: GRANGER_THREADS または CPU 数)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    test = subparsers.add_parser("test", help="1組の系列の因果性検定")
    test.add_argument("x_label", help="原因候補の系列名")
    test.add_argument("y_label", help="結果候補の系列名")
    test.add_argument("--lag", type=int, default=1, help="ラグ次数 (デフォルト: 1)")
    test.add_argument("--method", choices=[m.value for m in Method], default=Method.GLS_WALD.value)
    test.add_argument("--alpha", type=float, default=None, help="有意水準 (デフォルト: 0.05)")
    test.add_argument("--json", action="store_true", help="JSON で出力します")
    test.add_argument("--dump-cov", type=str, default=None, help="GLS に使った Ω̂ を CSV に保存します")
    _add_data_options(test)
    _add_gls_options(test)

    graph = subparsers.add_parser("graph", help="全ペアを検定して因果グラフを作成")
    graph.add_argument("--method", choices=[m.value for m in Method], default=None)
    lag = graph.add_mutually_exclusive_group()
    lag.add_argument("--lag", type=int, default=None, help="固定ラグ (デフォルト: 1)")
    lag.add_argument("--auto-lag", type=int, default=None, metavar="P_MAX", help="AIC で 1..P_MAX からラグを選択")
    graph.add_argument("--global-lag", action="store_true", help="AIC の合計が最小の共通ラグを使います")
    graph.add_argument("--fdr", action="store_true", help="Benjamini-Hochberg 法で判定します")
    graph.add_argument("--alpha", type=float, default=None, help="有意水準 (デフォルト: 0.05)")
    graph.add_argument("--out-dot", type=str, default=None, help="DOT ファイルの出力先")
    graph.add_argument("--out-json", type=str, default=None, help="JSON ファイルの出力先")
    graph.add_argument("--json", action="store_true", help="JSON を標準出力に出力します")
    _add_data_options(graph)
    _add_gls_options(graph)

    simulate = subparsers.add_parser("simulate", help="合成データの生成")
    simulate.add_argument("--scenario", choices=[s.value for s in Scenario], required=True)
    simulate.add_argument("--n", type=int, default=600, help="系列長 (デフォルト: 600)")
    simulate.add_argument("--lag", type=int, default=15, help="因果のラグ L (デフォルト: 15)")
    simulate.add_argument("--seed", type=int, default=0, help="乱数シード (デフォルト: 0)")
    simulate.add_argument("--out", type=str, required=True, help="CSV ファイルの出力先")

    bench = subparsers.add_parser("bench", help="正解率のベンチマーク")
    bench.add_argument("--pairs", type=int, default=None, help="シナリオごとのペア数 (デフォルト: 150)")
    bench.add_argument("--n", type=int, default=None, help="系列長 (デフォルト: 600)")
    bench.add_argument("--lag", type=int, default=None, help="生成と検定のラグ (デフォルト: 15)")
    bench.add_argument("--tau-frac", type=float, default=None, help="窓長の割合 (デフォルト: 0.2)")
    bench.add_argument("--alpha", type=float, default=None, help="有意水準 (デフォルト: 0.05)")
    bench.add_argument("--seed", type=int, default=None, help="親シード (デフォルト: 20240601)")
    bench.add_argument("--scenarios", type=str, default=None, help="カンマ区切りのシナリオ (例: m1,ar1)")
    bench.add_argument("--eps-rel", type=float, default=None, help="Ω̂ の固有値の相対下限 (デフォルト: 1e-8)")
    _add_covariance_options(bench)
    bench.add_argument("--json", action="store_true", help="JSON で出力します")

    cov = subparsers.add_parser("cov", help="スライディング自己共分散行列の出力")
    cov.add_argument("--column", type=str, default=None, help="対象の系列名（--data と併用）")
    cov.add_argument("--ar1-phi", type=float, default=None, help="AR(1) 系列を生成して使います")
    cov.add_argument("--n", type=int, default=600, help="AR(1) の系列長 (デフォルト: 600)")
    cov.add_argument("--seed", type=int, default=0, help="AR(1) の乱数シード (デフォルト: 0)")
    cov.add_argument("--tau", type=int, default=None, help="窓長（指定しない場合は --tau-frac から計算）")
    cov.add_argument("--out", type=str, required=True, help="CSV 行列の出力先")
    cov.add_argument("--theoretical", type=str, default=None, help="AR(1) の理論行列の出力先")
    _add_data_options(cov, required=False)
    _add_gls_options(cov)

    return parser


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "test": run_test_command,
    "graph": run_graph_command,
    "simulate": run_simulate_command,
    "bench": run_bench_command,
    "cov": run_cov_command,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    コマンドライン引数に基づいて、指定されたコマンドを実行します。

    Returns
    -------
    int
        終了コード（0: 成功, 2: 入力エラー, 3: 数値エラー, 4: 入出力エラー）。
    """
    # 環境変数の読み込み
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        code = COMMANDS[args.command](args)
    except InvalidArgumentError as e:
        logger.error(f"入力エラー: {e}")
        code = EXIT_USAGE
    except NumericalError as e:
        logger.error(f"数値エラー: {e}")
        code = EXIT_NUMERICAL
    except OSError as e:
        logger.error(f"入出力エラー: {e}")
        code = EXIT_IO
    except GrangerError as e:
        logger.error(f"エラー: {e}")
        code = EXIT_NUMERICAL

    # 実行完了後にレポートを表示
    counter.report()
    return code


if __name__ == "__main__":
    sys.exit(main())
