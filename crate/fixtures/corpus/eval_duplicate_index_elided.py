evaluation_plan = [
    (0, {'can_grasp': ('crumpled paper ball 1', 'top'), 'collision_free': (), 
    'timeout': (), 'check_motion_health': ()}, (True, '', True, True)),
    (1, {'holding': (), 'collision_free': (), 
    'timeout': (), 'check_motion_health': ()}, (True, '', True, True)),
    ...
    (8, {'can_reach': ('storage shelf', 'side'), 'collision_free': (), 'timeout': (),
    'check_motion_health': ()}, (True, '', True, True)),
    (8, {'at_location': ('whole apple', 'storage shelf'), 'collision_free': (), 
    'timeout': (), 'check_motion_health': ()}, (True, '', True, True)),}
    (9, {'can_grasp': ('half-eaten apple', 'side'), 'collision_free': (), 'timeout': (),
    'check_motion_health': ()}, (True, '', True, True)),
    (10, {'holding': (), 'collision_free': (), 'timeout': (), 'check_motion_health': ()}, 
    (True, '', True, True)),
    (11, {'can_reach': ('storage shelf', 'side'), 'collision_free': (), 'timeout': (),
    'check_motion_health': ()}, (True, '', True, True)),
    (11, {'at_location': ('half-eaten apple', 'storage shelf'), 'collision_free': (), 
    'timeout': (), 'check_motion_health': ()}, (True, '', True, True)),
    ...
]
