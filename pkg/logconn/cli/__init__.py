# Job files, expression grammar and report runner
