evaluation_plan = [
    (0, {'can_grasp': ('half-eaten apple', 'side'), 'collision_free': (), 'timeout': (), 'check_motion_health': ()},
     (True, '', True, True)),
    (1, {'holding': (), 'collision_free': (), 'timeout': (), 'check_motion_health': ()}, (True, '', True, True)),
]
