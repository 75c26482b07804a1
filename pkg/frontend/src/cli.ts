#!/usr/bin/env node
import { ALL_FIGURES, FigureName, render } from './figures';

function usage(): never {
  console.error(
    'usage: ringcast-render render --in <run dir> --out <dir> [--figs throughput,histograms,sweep]',
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv.length === 0 || argv[0] !== 'render') usage();
  let inDir: string | undefined;
  let outDir: string | undefined;
  let figs: FigureName[] = [...ALL_FIGURES];
  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === '--in') inDir = argv[++i];
    else if (arg === '--out') outDir = argv[++i];
    else if (arg === '--figs') {
      const names = (argv[++i] ?? '').split(',').map((f) => f.trim()).filter(Boolean);
      for (const name of names) {
        if (!ALL_FIGURES.includes(name as FigureName)) {
          console.error(`unknown figure ${name}; choose from ${ALL_FIGURES.join(',')}`);
          return 2;
        }
      }
      figs = names as FigureName[];
    } else usage();
  }
  if (!inDir || !outDir) usage();
  const result = render(inDir, outDir, figs);
  for (const skip of result.skipped) {
    console.warn(`warning: skipped ${skip}`);
  }
  for (const file of result.written) {
    console.log(file);
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
