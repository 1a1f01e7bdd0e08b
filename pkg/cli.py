#!/usr/bin/env python3
"""
Interface de linha de comando do cascade-ge
"""

import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import click
import numpy as np
import pandas as pd

from cascade.incidence import CascadingOrder, IncidenceMatrix, cascading_order, ccdf_curve
from cces.aggregator import technologies_from_frame, technologies_to_frame
from cces.estimator import SectorData, estimate_nestwise, estimate_sectors
from cces.indices import tfpg_table
from config import VERSION, RunConfig, load_run_config
from dynge.welfare import (BaseAggregates, calibrate_capital, srop, srop_by_sector,
                           standard_triggers, synergy, synergy_frame)
from elasticity.substitution import elasticity_tables
from equilibrium.economy import Economy, EconomyKind
from equilibrium.solver import (equilibrium_prices, network_shares, restoring_productivity,
                                solve_equilibrium, verify_restoring)
from errors import CascadeError, NonConvergence, TableValidationError
from fluctuations.monte_carlo import (draw_shocks, moments_table, simulate_kinds, summarize)
from household.demand import HouseholdModel, price_index
from household.lambda_iv import estimate_lambda
from iotable.linked_table import LinkedIOTable, load_table, save_table, validate_balances
from output_files import (header_line, read_csv, read_json, split_paths, vector_frame, write_csv,
                          write_json)
from synthetic.generator import generate_economy

logger = logging.getLogger(__name__)

KINDS = [k.value for k in EconomyKind]


def _echo(message: str):
    click.echo(message, err=True)


def _config(ctx: click.Context, subcommand: str, paths: Optional[dict] = None,
            **overrides) -> RunConfig:
    """Configuração final: padrões < arquivo < ambiente < opções globais < opções do comando"""
    merged = dict(ctx.obj.get('overrides', {}))
    merged.update({k: v for k, v in overrides.items() if v is not None})
    cfg = load_run_config(ctx.obj.get('config_path'), merged)
    cfg.subcommand = subcommand
    cfg.paths = {k: str(v) for k, v in (paths or {}).items() if v}
    return cfg


def _load(inputs: Sequence[str]) -> LinkedIOTable:
    table = load_table(list(inputs) if len(inputs) > 1 else inputs[0])
    _echo(f"📊 Tabela carregada: {table.J} setores")
    return table


def _order(table: LinkedIOTable, order_path: Optional[str]) -> CascadingOrder:
    if order_path:
        frame = read_csv(order_path, dtype={'sector_id': str})
        return CascadingOrder.from_frame(frame, table.sectors)
    return cascading_order(IncidenceMatrix.from_table(table))


def _technologies(table: LinkedIOTable, order: CascadingOrder, tech_path: Optional[str],
                  cfg: RunConfig):
    if tech_path:
        frame = read_csv(tech_path, dtype={'sector_id': str, 'factor_id': str})
        return technologies_from_frame(frame, table.sectors)
    _echo("🔄 Estimando tecnologias restauradoras...")
    return estimate_sectors(table, order, cfg.gamma_eps, cfg.share_floor, cfg.threads)


def _economy(table: LinkedIOTable, kind: str, tech_path: Optional[str], order_path: Optional[str],
             cfg: RunConfig) -> Economy:
    kind = EconomyKind.parse(kind)
    techs = None
    if kind == EconomyKind.CCES:
        techs = _technologies(table, _order(table, order_path), tech_path, cfg)
    return Economy.from_table(table, kind, techs, cfg.gamma_eps)


def _share_frame(shares) -> pd.DataFrame:
    frame = shares.to_frame()
    frame.index.name = 'factor_id'
    return frame.reset_index()


@click.group()
@click.option('--config', 'config_path', type=click.Path(), help='Arquivo de configuração key=value')
@click.option('--seed', type=int, help='Semente dos geradores aleatórios')
@click.option('--tol', type=float, help='Tolerância do ponto fixo de preços')
@click.option('--max-iter', type=int, help='Limite de iterações do ponto fixo')
@click.option('--damping', type=float, help='Amortecimento inicial do ponto fixo')
@click.option('--threads', type=int, help='Número máximo de threads')
@click.option('--verbose', is_flag=True, help='Mostra o log em nível INFO')
@click.version_option(VERSION, prog_name='cascade-ge')
@click.pass_context
def cli(ctx, config_path, seed, tol, max_iter, damping, threads, verbose):
    """Modelos de produção CES em cascata sobre tabelas insumo-produto ligadas"""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    ctx.ensure_object(dict)
    ctx.obj['config_path'] = config_path
    ctx.obj['overrides'] = {k: v for k, v in dict(seed=seed, tol=tol, max_iter=max_iter,
                                                  damping=damping, threads=threads).items()
                            if v is not None}


@cli.command()
@click.option('--input', 'inputs', multiple=True, required=True, help='CSV longo (ou um por período)')
@click.option('--report', type=click.Path(), help='CSV de resíduos de balanço')
@click.option('--balance-tol', type=float, help='Tolerância relativa dos balanços')
@click.option('--strict', is_flag=True, help='Falha se houver violações de balanço')
@click.pass_context
def load(ctx, inputs, report, balance_tol, strict):
    """Carrega e valida uma tabela ligada"""
    cfg = _config(ctx, 'load', {'report': report}, balance_tol=balance_tol)
    table = _load(inputs)
    balances = validate_balances(table, cfg.balance_tol)
    if report:
        write_csv(balances.to_frame(), report, cfg)
        _echo(f"✅ Relatório de balanços salvo em: {report}")
    if balances.ok:
        _echo("✅ Balanços dentro da tolerância")
    else:
        _echo(f"⚠️  {len(balances.violations)} violações de balanço acima de {cfg.balance_tol:g}")
        if strict:
            raise TableValidationError(f"{len(balances.violations)} violações de balanço")


@cli.command()
@click.option('--input', 'inputs', multiple=True, required=True)
@click.option('--out', required=True, type=click.Path(), help='order.csv')
@click.option('--ccdf', type=click.Path(), help='Pontos da curva CCDF')
@click.pass_context
def order(ctx, inputs, out, ccdf):
    """Ordem em cascata pela razão de graus"""
    cfg = _config(ctx, 'order', {'out': out, 'ccdf': ccdf})
    table = _load(inputs)
    inc = IncidenceMatrix.from_table(table)
    result = cascading_order(inc)
    write_csv(result.to_frame(), out, cfg)
    _echo(f"✅ Ordem em cascata salva em: {out} ({result.violations} fluxos circulares)")
    if ccdf:
        if table.J < 2:
            _echo("⚠️  Curva CCDF requer ao menos 2 setores")
        else:
            write_csv(ccdf_curve(table.J, inc).to_frame(), ccdf, cfg)


@cli.command()
@click.option('--input', 'inputs', multiple=True, required=True)
@click.option('--order', 'order_path', type=click.Path(), help='order.csv (calculada se omitida)')
@click.option('--method', type=click.Choice(['two-point', 'nestwise']), default='two-point')
@click.option('--out', required=True, type=click.Path(), help='tech.csv')
@click.pass_context
def estimate(ctx, inputs, order_path, method, out):
    """Estima os parâmetros CCES de cada setor"""
    cfg = _config(ctx, 'estimate', {'order': order_path, 'out': out})
    table = _load(inputs)
    ordering = _order(table, order_path)
    if method == 'two-point':
        techs = estimate_sectors(table, ordering, cfg.gamma_eps, cfg.share_floor, cfg.threads)
    else:
        techs = [estimate_nestwise(SectorData.from_table(table, j), ordering, cfg.gamma_eps,
                                   cfg.share_floor) for j in range(table.J)]
    write_csv(technologies_to_frame(techs, table.sectors), out, cfg)
    _echo(f"✅ {len(techs)} tecnologias salvas em: {out}")


@cli.command()
@click.option('--input', 'inputs', multiple=True, required=True)
@click.option('--order', 'order_path', type=click.Path())
@click.option('--method', type=click.Choice(['cces', 'translog', 'both']), default='cces')
@click.option('--out', required=True, type=click.Path(), help='tfpg.csv')
@click.pass_context
def tfp(ctx, inputs, order_path, method, out):
    """Crescimento da PTF por setor"""
    cfg = _config(ctx, 'tfp', {'order': order_path, 'out': out})
    table = _load(inputs)
    ordering = _order(table, order_path)
    methods = ['cces', 'translog'] if method == 'both' else [method]
    frame = pd.concat([tfpg_table(table, ordering, m, cfg.share_floor) for m in methods],
                      ignore_index=True)
    write_csv(frame, out, cfg)
    _echo(f"✅ PTF salva em: {out}")


@cli.command()
@click.option('--input', 'inputs', multiple=True, required=True)
@click.option('--tech', 'tech_path', type=click.Path(), help='tech.csv (estimada se omitida)')
@click.option('--order', 'order_path', type=click.Path())
@click.option('--kind', type=click.Choice(KINDS), default='cces')
@click.option('--tau', 'tau_path', type=click.Path(), help='CSV sector_id,tau')
@click.option('--period', type=click.IntRange(0, 1), default=1,
              help='Período de r, w e da produtividade restauradora padrão')
@click.option('--out', required=True, help='prices.csv,shares.csv')
@click.pass_context
def solve(ctx, inputs, tech_path, order_path, kind, tau_path, period, out):
    """Resolve o equilíbrio de preços p = C(p, r, w)/τ"""
    prices_path, shares_path = split_paths(out, 2)
    cfg = _config(ctx, 'solve', {'tech': tech_path, 'tau': tau_path, 'out': out})
    table = _load(inputs)
    econ = _economy(table, kind, tech_path, order_path, cfg)
    if tau_path:
        frame = read_csv(tau_path, dtype={'sector_id': str}).set_index('sector_id')
        tau = frame.reindex(list(table.sectors))['tau'].to_numpy(float)
        if np.isnan(tau).any():
            raise ValueError("Arquivo de produtividades não cobre todos os setores")
    else:
        tau = restoring_productivity(econ, table)[period]
    r, w = float(table.r[period]), float(table.w[period])

    if econ.kind == EconomyKind.CCES:
        state = solve_equilibrium(econ, tau, r, w, cfg.solver()).ensure_converged()
        prices, shares = state.p, state.S
        _echo(f"✅ Equilíbrio em {state.iterations} iterações (resíduo {state.residual:.2e})")
    else:
        prices = equilibrium_prices(econ, tau, r, w, cfg.solver())
        shares = network_shares(econ, prices, r, w, tau)
    write_csv(vector_frame(table.sectors, tau=tau, price=prices), prices_path, cfg)
    write_csv(_share_frame(shares), shares_path, cfg)
    _echo(f"✅ Preços em {prices_path}; redes em {shares_path}")


@cli.command()
@click.option('--input', 'inputs', multiple=True, required=True, help='Tabela da rede de referência')
@click.option('--tech', 'tech_path', type=click.Path())
@click.option('--order', 'order_path', type=click.Path())
@click.option('--kind', 'kinds', default=','.join(KINDS), help='Lista separada por vírgulas')
@click.option('--sigma', type=float, help='Volatilidade por ano')
@click.option('--ell', type=str, help='Horizonte: 1h, 1d, 1w, 1y ou anos')
@click.option('--draws', type=int)
@click.option('--seed', type=int)
@click.option('--out', required=True, help='series.csv,moments.csv,qq.csv')
@click.pass_context
def simulate(ctx, inputs, tech_path, order_path, kinds, sigma, ell, draws, seed, out):
    """Flutuações agregadas por Monte Carlo, mesma matriz de choques para todos os tipos"""
    series_path, moments_path, qq_path = split_paths(out, 3)
    cfg = _config(ctx, 'simulate', {'tech': tech_path, 'out': out},
                  sigma=sigma, ell=ell, draws=draws, seed=seed)
    names = [EconomyKind.parse(k).value for k in kinds.split(',') if k.strip()]
    table = _load(inputs)
    base_kind = 'cces' if 'cces' in names else names[0]
    econ = _economy(table, base_kind, tech_path, order_path, cfg)

    shocks = draw_shocks(econ.J, cfg.draws, cfg.sigma, cfg.ell, cfg.seed)
    _echo(f"🔄 Simulando {cfg.draws} sorteios para {', '.join(names)}")
    series = simulate_kinds(econ, shocks, names, cfg.solver(), cfg.threads)

    summaries = [summarize(s) for s in series.values()]
    if 'cd' in series:
        summaries += [summarize(s, series['cd']) for k, s in series.items() if k != 'cd']
    for s in series.values():
        if s.failed:
            _echo(f"⚠️  {s.kind}: {s.failed} sorteios sem equilíbrio excluídos")

    write_csv(pd.concat([s.to_frame() for s in series.values()], ignore_index=True),
              series_path, cfg)
    write_csv(moments_table(summaries), moments_path, cfg)
    write_csv(pd.concat([sm.qq.assign(series=sm.label) for sm in summaries], ignore_index=True)
              [['series', 'theoretical', 'sample']], qq_path, cfg)
    _echo(f"✅ Séries, momentos e pares QQ salvos ({series_path}, {moments_path}, {qq_path})")


def _item_frame(path: str, columns: List[str]) -> pd.DataFrame:
    frame = read_csv(path)
    key = 'item_id' if 'item_id' in frame.columns else 'sector_id'
    if key not in frame.columns:
        raise ValueError(f"{path}: coluna item_id ausente")
    if 'method' in frame.columns:
        frame = frame[frame['method'] == frame['method'].iloc[0]]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ValueError(f"{path}: colunas ausentes {missing}")
    frame = frame.assign(item_id=frame[key].astype(str))
    return frame[['item_id'] + columns]


@cli.command()
@click.option('--shares', 'shares_path', required=True, type=click.Path(), help='item_id,b0,b1')
@click.option('--prices', 'prices_path', required=True, type=click.Path(), help='item_id,p0,p1')
@click.option('--instruments', 'instruments_path', required=True, type=click.Path(),
              help='item_id,tfpg (saída do comando tfp serve)')
@click.option('--out', required=True, type=click.Path(), help='lambda.json')
@click.pass_context
def household(ctx, shares_path, prices_path, instruments_path, out):
    """Estima λ do domicílio por 2SLS ponderado"""
    cfg = _config(ctx, 'household', {'shares': shares_path, 'prices': prices_path,
                                     'instruments': instruments_path, 'out': out})
    data = _item_frame(shares_path, ['b0', 'b1']) \
        .merge(_item_frame(prices_path, ['p0', 'p1']), on='item_id') \
        .merge(_item_frame(instruments_path, ['tfpg']), on='item_id')
    result = estimate_lambda(data['b0'], data['b1'], data['p0'], data['p1'], data['tfpg'],
                             items=data['item_id'].tolist())
    write_json(result.to_dict(), out, cfg)
    _echo(f"✅ λ̂ = {result.lambda_hat:.5f} (EP {result.lambda_se:.5f}) com {result.n_items} itens")


def _lambda_from_json(path: str) -> float:
    payload = read_json(path)
    if 'lambda_hat' not in payload:
        raise TableValidationError(f"{path}: campo lambda_hat ausente")
    _echo(f"📊 Usando λ̂ = {payload['lambda_hat']:.5f} de {path}")
    return float(payload['lambda_hat'])


def _welfare_setup(table: LinkedIOTable, econ: Economy, cfg: RunConfig):
    base = BaseAggregates.from_table(table)
    hh = HouseholdModel.from_shares(base.h1, cfg.lam, cfg.gamma_eps)
    psi_ratio = price_index(table.p[1], hh) / price_index(table.p[0], hh)
    calib = calibrate_capital(base, psi_ratio, cfg.delta, cfg.beta)
    eta = f"{calib.eta_K:.4f}" if calib.eta_defined else "indefinido"
    _echo(f"📊 Capital calibrado: z0ρ={calib.z0rho:.4f}, z1ρ={calib.z1rho:.4f}, η_K={eta}")
    return base, hh, calib


@cli.command(name='srop')
@click.option('--input', 'inputs', multiple=True, required=True)
@click.option('--tech', 'tech_path', type=click.Path())
@click.option('--order', 'order_path', type=click.Path())
@click.option('--sector', default='all', help="'all', 'each' ou id do setor")
@click.option('--theta', type=float)
@click.option('--lambda', 'lam', type=float, help='Expoente λ do domicílio')
@click.option('--lambda-json', 'lambda_json', type=click.Path(),
              help='lambda.json do comando household (usa lambda_hat)')
@click.option('--out', required=True, type=click.Path(), help='srop.csv')
@click.pass_context
def srop_command(ctx, inputs, tech_path, order_path, sector, theta, lam, lambda_json, out):
    """Retorno social de produtividade padronizada"""
    if lambda_json:
        if lam is not None:
            raise click.UsageError("Use --lambda ou --lambda-json, não ambos")
        lam = _lambda_from_json(lambda_json)
    cfg = _config(ctx, 'srop', {'tech': tech_path, 'out': out}, theta=theta, lam=lam)
    table = _load(inputs)
    econ = _economy(table, 'cces', tech_path, order_path, cfg)
    base, hh, calib = _welfare_setup(table, econ, cfg)
    if sector == 'each':
        sweep = srop_by_sector(econ, hh, calib, base, cfg.theta, cfg.solver(), cfg.threads)
        frame = pd.concat([sweep.frame, pd.DataFrame({'sector_id': ['SUM', 'ALL'],
                                                      'srop': [sweep.total, sweep.all_sectors]})],
                          ignore_index=True)
    else:
        value = srop(econ, hh, calib, base, sector, cfg.theta, cfg.solver())
        frame = pd.DataFrame({'sector_id': ['ALL' if sector.lower() == 'all' else sector],
                              'srop': [value]})
    write_csv(frame, out, cfg)
    _echo(f"✅ SROP salvo em: {out}")


@cli.command(name='synergy')
@click.option('--input', 'inputs', multiple=True, required=True)
@click.option('--tech', 'tech_path', type=click.Path())
@click.option('--order', 'order_path', type=click.Path())
@click.option('--kind', type=click.Choice(KINDS), default='cces')
@click.option('--theta', type=float)
@click.option('--out', required=True, type=click.Path(), help='synergy.csv')
@click.pass_context
def synergy_command(ctx, inputs, tech_path, order_path, kind, theta, out):
    """Sinergia da imposição simultânea dos gatilhos padronizados"""
    cfg = _config(ctx, 'synergy', {'tech': tech_path, 'out': out}, theta=theta)
    table = _load(inputs)
    econ = _economy(table, kind, tech_path, order_path, cfg)
    base = BaseAggregates.from_table(table)
    values = synergy(econ, standard_triggers(base, cfg.theta), base.r1, base.w1,
                     cfg.solver(), cfg.threads)
    write_csv(synergy_frame(values, table.sectors), out, cfg)
    _echo(f"✅ Sinergia salva em: {out}")


@cli.command()
@click.option('--input', 'inputs', multiple=True, required=True)
@click.option('--tech', 'tech_path', type=click.Path())
@click.option('--order', 'order_path', type=click.Path())
@click.option('--sector', required=True, help='id do setor')
@click.option('--at', 'at', type=click.Choice(['reference', 'period0']), default='reference')
@click.option('--out', required=True, help='aues.csv,mes.csv')
@click.pass_context
def elasticity(ctx, inputs, tech_path, order_path, sector, at, out):
    """Tabelas de AUES e MES de um setor"""
    aues_path, mes_path = split_paths(out, 2)
    cfg = _config(ctx, 'elasticity', {'tech': tech_path, 'out': out})
    table = _load(inputs)
    techs = _technologies(table, _order(table, order_path), tech_path, cfg)
    tech = techs[table.index_of(sector)]
    prices = table.prices(1 if at == 'reference' else 0)
    tables = elasticity_tables(tech, prices, table.sectors, gamma_eps=cfg.gamma_eps,
                               max_workers=cfg.threads)
    for frame, path in zip(tables.to_frames(), (aues_path, mes_path)):
        frame.index.name = 'factor_id'
        write_csv(frame.reset_index(), path, cfg)
    _echo(f"✅ Elasticidades salvas em: {aues_path}, {mes_path}")


@cli.command()
@click.option('--input', 'inputs', multiple=True, required=True)
@click.option('--out-dir', required=True, type=click.Path(), help='Diretório de saída')
@click.pass_context
def pipeline(ctx, inputs, out_dir):
    """Carga, ordem, estimação e verificação da restauração de ponta a ponta"""
    cfg = _config(ctx, 'pipeline', {'out_dir': out_dir})
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    table = _load(inputs)
    balances = validate_balances(table, cfg.balance_tol)
    if not balances.ok:
        _echo(f"⚠️  {len(balances.violations)} violações de balanço")
    ordering = cascading_order(IncidenceMatrix.from_table(table))
    write_csv(ordering.to_frame(), out / 'order.csv', cfg)

    techs = estimate_sectors(table, ordering, cfg.gamma_eps, cfg.share_floor, cfg.threads)
    write_csv(technologies_to_frame(techs, table.sectors), out / 'tech.csv', cfg)

    econ = Economy.from_table(table, EconomyKind.CCES, techs, cfg.gamma_eps)
    tauhat = restoring_productivity(econ, table)
    write_csv(vector_frame(table.sectors, tauhat0=tauhat[0], tauhat1=tauhat[1]),
              out / 'tauhat.csv', cfg)

    _echo("🔄 Verificando restauração dos dois períodos...")
    report = verify_restoring(econ, table, tauhat, cfg.solver())
    write_csv(report.to_frame(), out / 'restoration.csv', cfg)

    summary = {
        'status': 'success',
        'sectors': table.J,
        'balance_ok': balances.ok,
        'balance_violations': len(balances.violations),
        'circular_flows': ordering.violations,
        'max_price_gap': report.max_price_gap,
        'max_share_gap': report.max_share_gap,
        'restored': report.ok(),
        'periods': report.to_frame().to_dict(orient='records'),
    }
    write_json(summary, out / 'summary.json', cfg)
    if not all(g.converged for g in report.periods):
        bad = [g for g in report.periods if not g.converged][0]
        raise NonConvergence(f"Equilíbrio do período {bad.period} não convergiu",
                             bad.iterations, bad.residual)
    _echo(f"✅ Restauração: gap de preços {report.max_price_gap:.2e}, "
          f"gap de redes {report.max_share_gap:.2e}")


@cli.command()
@click.option('--sectors', 'J', type=int, default=8, help='Número de setores')
@click.option('--seed', type=int)
@click.option('--out', required=True, type=click.Path(), help='Tabela em CSV longo')
@click.option('--tech-out', type=click.Path(), help='Tecnologias verdadeiras')
@click.pass_context
def synth(ctx, J, seed, out, tech_out):
    """Gera uma economia sintética com tecnologias conhecidas"""
    cfg = _config(ctx, 'synth', {'out': out, 'tech_out': tech_out}, seed=seed)
    economy = generate_economy(J, cfg.seed, cfg=cfg.solver())
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    save_table(economy.table, out, header_line(cfg))
    if tech_out:
        write_csv(technologies_to_frame(economy.techs, economy.table.sectors), tech_out, cfg)
    _echo(f"✅ Economia sintética com {J} setores salva em: {out}")


def _error_payload(code: int, exc: BaseException) -> str:
    message = exc.format_message() if isinstance(exc, click.ClickException) else str(exc)
    return json.dumps({'status': 'error', 'code': code, 'type': type(exc).__name__,
                       'message': message}, ensure_ascii=False)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Executa a CLI e devolve o código de saída

    0 em sucesso; 1 em erro de uso, validação, estimação ou calibração;
    2 quando um equilíbrio não converge. Erros saem em JSON no stderr.
    """
    try:
        result = cli.main(args=list(argv) if argv is not None else None,
                          prog_name='cascade-ge', standalone_mode=False)
        return result if isinstance(result, int) else 0
    except click.UsageError as e:
        e.show()
        code = 1
        error = e
    except NonConvergence as e:
        code = 2
        error = e
    except (click.ClickException, click.Abort, CascadeError, ValueError, OSError) as e:
        code = 1
        error = e
    _echo(f"❌ {error}")
    _echo(_error_payload(code, error))
    return code


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
