#!/usr/bin/env node
const { runPlotFit } = require("../dist/cli");
process.exit(runPlotFit(process.argv.slice(2)));
