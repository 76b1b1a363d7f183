#!/usr/bin/env node
const { runEcdfGrid } = require("../dist/cli");
process.exit(runEcdfGrid(process.argv.slice(2)));
