# Exact engines: field, rational functions, connections, covers, twists, existence
